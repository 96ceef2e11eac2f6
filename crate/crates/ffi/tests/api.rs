use std::ffi::{CStr, CString};
use std::ptr;

use noodl_ffi::*;

fn last_error() -> String {
    let p = noodl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn generate(n: usize, m: usize, seed: u64) -> *mut NoodlDictionary {
    let mut d = ptr::null_mut();
    assert_eq!(
        unsafe { noodl_dictionary_generate(n, m, seed, &mut d) },
        NoodlStatus::Ok
    );
    d
}

fn data(d: *const NoodlDictionary) -> Vec<f64> {
    let (mut n, mut m) = (0, 0);
    unsafe {
        assert_eq!(noodl_dictionary_dims(d, &mut n, &mut m), NoodlStatus::Ok);
        let mut buf = vec![0.0; n * m];
        assert_eq!(
            noodl_dictionary_copy_data(d, buf.as_mut_ptr(), buf.len()),
            NoodlStatus::Ok
        );
        buf
    }
}

fn config(n: usize, m: usize, max_iters: usize, epsilon0: f64) -> CString {
    let json = serde_json::json!({
        "model": {"n": n, "m": m, "k": 3, "c": 1.0, "value_dist": {"kind": "rademacher"}, "epsilon0": epsilon0},
        "solver": {
            "coeff": {"eta_x": 0.2, "tau": 0.1, "steps": {"decay": 1e-15}, "c": 1.0, "stall_tol": 1e-12},
            "eta_a": 10.0, "max_iters": max_iters, "eps_t": 1e-10, "delta_t": 1e-9,
            "dict_stop": 1e-10, "p": 600, "seed": 5
        }
    });
    CString::new(json.to_string()).unwrap()
}

#[test]
fn generated_dictionary_matches_core() {
    let d = generate(12, 18, 9);
    let expected = noodl::model::generate_ground_truth(12, 18, 9).unwrap();
    let buf = data(d);
    for i in 0..18 {
        assert_eq!(&buf[i * 12..(i + 1) * 12], expected.atom_slice(i));
    }
    let mut mu = 0.0;
    assert_eq!(unsafe { noodl_dictionary_incoherence(d, &mut mu) }, NoodlStatus::Ok);
    assert_eq!(mu, noodl::model::incoherence(&expected));
    unsafe { noodl_dictionary_free(d) };
}

#[test]
fn from_data_round_trips_and_normalizes() {
    let raw = [3.0, 4.0, 0.0, 2.0];
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(
            noodl_dictionary_from_data(raw.as_ptr(), 2, 2, true, &mut d),
            NoodlStatus::Ok
        );
        assert_eq!(data(d), vec![0.6, 0.8, 0.0, 1.0]);
        noodl_dictionary_free(d);
        let mut bad = ptr::null_mut();
        assert_eq!(
            noodl_dictionary_from_data(raw.as_ptr(), 2, 2, false, &mut bad),
            NoodlStatus::Shape
        );
        assert!(bad.is_null());
        assert!(last_error().contains("not unit norm"));
        let zeros = [0.0; 4];
        assert_eq!(
            noodl_dictionary_from_data(zeros.as_ptr(), 2, 2, true, &mut bad),
            NoodlStatus::Degenerate
        );
        assert_eq!(
            noodl_dictionary_from_data(raw.as_ptr(), 0, 2, true, &mut bad),
            NoodlStatus::InvalidArgument
        );
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(
            noodl_dictionary_generate(2, 2, 0, ptr::null_mut()),
            NoodlStatus::NullPointer
        );
        assert_eq!(
            noodl_dictionary_dims(ptr::null(), ptr::null_mut(), ptr::null_mut()),
            NoodlStatus::NullPointer
        );
        assert!(last_error().contains("null"));
        assert_eq!(noodl_run_trace_len(ptr::null()), 0);
        noodl_dictionary_free(ptr::null_mut());
        noodl_run_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_the_error() {
    unsafe {
        assert_eq!(
            noodl_dictionary_generate(2, 2, 0, ptr::null_mut()),
            NoodlStatus::NullPointer
        );
    }
    let d = generate(3, 3, 0);
    assert!(noodl_last_error().is_null());
    unsafe { noodl_dictionary_free(d) };
}

#[test]
fn perturbation_distance() {
    let truth = generate(40, 60, 2);
    let mut a0 = ptr::null_mut();
    unsafe {
        assert_eq!(noodl_dictionary_perturb(truth, 0.2, 4, &mut a0), NoodlStatus::Ok);
    }
    let (t, a) = (data(truth), data(a0));
    for (ct, ca) in t.chunks(40).zip(a.chunks(40)) {
        let d: f64 = ct.iter().zip(ca).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        assert!((d - 0.2).abs() < 1e-12);
    }
    unsafe {
        assert_eq!(noodl_dictionary_perturb(truth, 2.5, 4, &mut a0), NoodlStatus::Config);
        noodl_dictionary_free(a0);
        noodl_dictionary_free(truth);
    }
}

#[test]
fn run_matches_the_library() {
    let truth = generate(100, 150, 1);
    let cfg = config(100, 150, 4, 0.3);
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(
            noodl_run(truth, cfg.as_ptr(), NoodlAlgorithm::Noodl, &mut run),
            NoodlStatus::Ok
        );
    }
    let core_truth = noodl::model::generate_ground_truth(100, 150, 1).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(cfg.to_str().unwrap()).unwrap();
    let gen: noodl::GenerativeConfig = serde_json::from_value(parsed["model"].clone()).unwrap();
    let solver: noodl::SolverConfig = serde_json::from_value(parsed["solver"].clone()).unwrap();
    let expected = noodl::run_noodl(&core_truth, &gen, &solver).unwrap();

    unsafe {
        assert_eq!(noodl_run_trace_len(run), 4);
        for (i, e) in expected.trace.iter().enumerate() {
            let mut row = std::mem::zeroed::<NoodlTraceRow>();
            assert_eq!(noodl_run_trace_row(run, i, &mut row), NoodlStatus::Ok);
            assert_eq!(row.t, e.t);
            assert_eq!(Some(row.max_col_err), e.max_col_err);
            assert_eq!(Some(row.rel_frob_x), e.rel_frob_x);
            assert_eq!(row.fit, e.fit);
        }
        let mut row = std::mem::zeroed::<NoodlTraceRow>();
        assert_eq!(noodl_run_trace_row(run, 4, &mut row), NoodlStatus::InvalidArgument);
        let mut term = NoodlTermination::DictTol;
        assert_eq!(noodl_run_termination(run, &mut term), NoodlStatus::Ok);
        assert_eq!(term, NoodlTermination::MaxIters);
        let mut fin = ptr::null_mut();
        assert_eq!(noodl_run_dictionary(run, &mut fin), NoodlStatus::Ok);
        let buf = data(fin);
        for i in 0..150 {
            assert_eq!(&buf[i * 100..(i + 1) * 100], expected.dictionary.atom_slice(i));
        }
        noodl_dictionary_free(fin);
        noodl_run_free(run);
        noodl_dictionary_free(truth);
    }
}

#[test]
fn exact_start_stops_immediately() {
    let truth = generate(100, 150, 1);
    let cfg = config(100, 150, 10, 0.0);
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(
            noodl_run(truth, cfg.as_ptr(), NoodlAlgorithm::Noodl, &mut run),
            NoodlStatus::Ok
        );
        assert_eq!(noodl_run_trace_len(run), 1);
        let mut term = NoodlTermination::MaxIters;
        noodl_run_termination(run, &mut term);
        assert_eq!(term, NoodlTermination::DictTol);
        noodl_run_free(run);
        noodl_dictionary_free(truth);
    }
}

#[test]
fn bad_config_is_a_config_error() {
    let truth = generate(10, 12, 1);
    let mut run = ptr::null_mut();
    let cases = [
        CString::new("{not json").unwrap(),
        CString::new(r#"{"model": {}}"#).unwrap(),
        config(10, 12, 0, 0.3),
    ];
    for c in &cases {
        let status = unsafe { noodl_run(truth, c.as_ptr(), NoodlAlgorithm::BiasedHt, &mut run) };
        assert_eq!(status, NoodlStatus::Config, "{c:?}");
        assert!(run.is_null());
    }
    let mismatched = config(20, 12, 3, 0.3);
    let status = unsafe { noodl_run(truth, mismatched.as_ptr(), NoodlAlgorithm::Noodl, &mut run) };
    assert_eq!(status, NoodlStatus::Shape);
    unsafe { noodl_dictionary_free(truth) };
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(noodl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
