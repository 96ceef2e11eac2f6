use noodl::model::{
    check_closeness, generate_batch, generate_ground_truth, perturb_dictionary, sample_coefficient_vector,
    GenerativeConfig, ValueDist,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generated_and_perturbed_columns_are_unit_norm(n in 2usize..40, m in 1usize..60, eps in 0.0f64..1.5, seed in any::<u64>()) {
        let a = generate_ground_truth(n, m, seed).unwrap();
        prop_assert!(a.max_norm_deviation() <= 1e-12);
        let b = perturb_dictionary(&a, eps, seed ^ 1).unwrap();
        prop_assert!(b.max_norm_deviation() <= 1e-12);
        for i in 0..m {
            let d: f64 = a.atom(i).iter().zip(b.atom(i)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            prop_assert!((d - eps).abs() <= 1e-12, "atom {} at distance {} not {}", i, d, eps);
        }
    }

    #[test]
    fn batches_are_exact_sparse_combinations(k in 1usize..6, p in 1usize..30, seed in any::<u64>()) {
        let gen = GenerativeConfig::standard(20, 30, k);
        let a = generate_ground_truth(20, 30, seed).unwrap();
        let batch = generate_batch(&a, p, &gen, seed.wrapping_add(3)).unwrap();
        let x = batch.x_star.as_ref().unwrap();
        prop_assert_eq!(x.p(), p);
        let dense = a.matrix().dot(&x.to_dense());
        for (u, v) in dense.iter().zip(batch.y.iter()) {
            prop_assert!((u - v).abs() <= 1e-14);
        }
        for col in x.columns() {
            prop_assert_eq!(col.nnz(), k);
        }
    }
}

#[test]
fn same_seed_same_bits() {
    let gen = GenerativeConfig::standard(40, 60, 4);
    let a = generate_ground_truth(40, 60, 11).unwrap();
    let b = generate_ground_truth(40, 60, 11).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, generate_ground_truth(40, 60, 12).unwrap());
    let p0 = perturb_dictionary(&a, 0.3, 2).unwrap();
    assert_eq!(p0, perturb_dictionary(&b, 0.3, 2).unwrap());
    let y0 = generate_batch(&a, 50, &gen, 5).unwrap();
    let y1 = generate_batch(&a, 50, &gen, 5).unwrap();
    assert_eq!(y0.y, y1.y);
    assert_eq!(y0.x_star, y1.x_star);
}

#[test]
fn batch_prefixes_agree() {
    // column j depends only on (seed, j), not on the batch size
    let gen = GenerativeConfig::standard(30, 45, 3);
    let a = generate_ground_truth(30, 45, 1).unwrap();
    let small = generate_batch(&a, 10, &gen, 9).unwrap();
    let big = generate_batch(&a, 40, &gen, 9).unwrap();
    for j in 0..10 {
        assert_eq!(small.y.column(j), big.y.column(j));
    }
}

#[test]
fn perturbation_within_half_keeps_identity_matching() {
    for seed in 0..20u64 {
        for &(n, m) in &[(50usize, 60usize), (50, 100), (100, 200)] {
            let truth = generate_ground_truth(n, m, seed).unwrap();
            for &eps in &[0.1, 0.3, 0.5] {
                let a = perturb_dictionary(&truth, eps, seed + 100).unwrap();
                let report = check_closeness(&a, &truth, eps + 1e-12, 2.0);
                let mt = report.matching.as_ref().unwrap();
                assert!(mt.is_identity(), "seed {seed} n {n} m {m} eps {eps}");
                assert!(report.columns_ok);
                assert!((report.epsilon - eps).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn conditional_moments_rademacher() {
    const N: usize = 100_000;
    let gen = GenerativeConfig::standard(100, 100, 3);
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let (mut cnt, mut sum, mut sq) = (0usize, 0.0, 0.0);
    for _ in 0..N {
        for (_, v) in sample_coefficient_vector(&gen, &mut rng).iter() {
            cnt += 1;
            sum += v;
            sq += v * v;
        }
    }
    // E[x_i | i in S] = 0 with unit variance; the second moment is exactly C^2.
    let mean = sum / cnt as f64;
    assert!(mean.abs() <= 3.0 / (cnt as f64).sqrt(), "mean {mean}");
    assert_eq!(sq / cnt as f64, 1.0);
}

#[test]
fn conditional_moments_uniform_magnitude() {
    const N: usize = 100_000;
    let gen = GenerativeConfig {
        c: 0.5,
        value_dist: ValueDist::UniformMagnitude { lo: 0.5, hi: 1.5 },
        ..GenerativeConfig::standard(100, 100, 3)
    };
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut vals = Vec::new();
    for _ in 0..N {
        vals.extend(sample_coefficient_vector(&gen, &mut rng).values().iter().copied());
    }
    assert!(vals.iter().all(|v| (0.5..=1.5).contains(&v.abs())));
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    // |x| ~ U[0.5, 1.5], so E[x^2] = (1.5^3 - 0.5^3) / 3 = 13/12
    let second = 13.0 / 12.0;
    assert!(mean.abs() <= 3.0 * (second / n).sqrt());
    let fourth = (1.5f64.powi(5) - 0.5f64.powi(5)) / 5.0;
    let sd2 = ((fourth - second * second) / n).sqrt();
    let m2 = vals.iter().map(|v| v * v).sum::<f64>() / n;
    assert!((m2 - second).abs() <= 3.0 * sd2, "{m2} vs {second}");
}

#[test]
fn invalid_configs_rejected() {
    let ok = GenerativeConfig::standard(10, 20, 3);
    assert!(ok.validate().is_ok());
    for bad in [
        GenerativeConfig { k: 20, ..ok.clone() },
        GenerativeConfig {
            k: 11,
            m: 30,
            ..ok.clone()
        },
        GenerativeConfig { c: 0.0, ..ok.clone() },
        GenerativeConfig { c: 1.5, ..ok.clone() },
        GenerativeConfig {
            epsilon0: 2.0,
            ..ok.clone()
        },
        GenerativeConfig {
            value_dist: ValueDist::UniformMagnitude { lo: 0.5, hi: 2.0 },
            ..ok.clone()
        },
    ] {
        assert!(bad.validate().is_err(), "{bad:?}");
    }
}
