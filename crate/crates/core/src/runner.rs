//! The online outer loop: fresh batch, coefficient estimation, dictionary
//! update, metrics.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coeff::{estimate_with_steps, CoeffSolverConfig};
use crate::dict_update::{empirical_gradient, gradient_step, normalize_columns};
use crate::error::{NoodlError, Result};
use crate::metrics::{fit_error, max_abs_coeff_err, rel_frobenius, rel_frobenius_coeffs, support_accuracy};
use crate::model::{
    generate_batch, match_columns, perturb_dictionary, Batch, Dictionary, GenerativeConfig, Matching,
    SparseCoefficientBatch,
};
use crate::rng::{derive_seed, label};

/// Fit change below which a run without ground truth is considered converged.
pub const FIT_STALL_TOL: f64 = 1e-12;

/// Header of the trace CSV (after the version comment line).
pub const TRACE_HEADER: &str = "t,max_col_err,rel_frob_A,rel_frob_X,fit,support_acc,wall_ms";
pub const TRACE_SCHEMA: &str = "# noodl-trace v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Thresholded initialization refined by IHT.
    Noodl,
    /// Thresholded initialization only.
    BiasedHt,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Noodl => "noodl",
            Algorithm::BiasedHt => "biased_ht",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub coeff: CoeffSolverConfig,
    /// Dictionary step size.
    pub eta_a: f64,
    /// Maximum number of outer iterations.
    pub max_iters: usize,
    /// Target column error, reported against in summaries.
    pub eps_t: f64,
    /// Target coefficient error, reported against in summaries.
    pub delta_t: f64,
    /// Stop once the largest column error falls below this.
    pub dict_stop: f64,
    /// Samples per outer iteration.
    pub p: usize,
    pub seed: u64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.coeff.validate()?;
        if self.max_iters == 0 {
            return Err(NoodlError::config("max_iters must be at least 1"));
        }
        if self.p == 0 {
            return Err(NoodlError::config("batch size p must be at least 1"));
        }
        if !(self.eta_a > 0.0 && self.eta_a.is_finite()) {
            return Err(NoodlError::config(format!(
                "eta_A must be positive, got {}",
                self.eta_a
            )));
        }
        for (name, v) in [
            ("eps_t", self.eps_t),
            ("delta_t", self.delta_t),
            ("dict_stop", self.dict_stop),
        ] {
            if !(v > 0.0) {
                return Err(NoodlError::config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Metrics recorded after outer iteration `t`.
///
/// Dictionary errors refer to the updated dictionary `A(t+1)`; coefficient
/// errors, support accuracy and fit refer to the estimate `X(t)` produced
/// with `A(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub t: usize,
    pub max_col_err: Option<f64>,
    pub rel_frob_a: Option<f64>,
    pub rel_frob_x: Option<f64>,
    pub fit: f64,
    pub support_acc: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIters,
    DictTol,
    /// Fit stopped changing (runs without ground truth only).
    FitTol,
    Degenerate,
    /// The supplied batch sequence ran out before `max_iters`.
    DataExhausted,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub dictionary: Dictionary,
    pub coefficients: SparseCoefficientBatch,
    pub trace: Vec<IterationTrace>,
    pub termination: Termination,
    /// Seed of the batch consumed at each iteration, when generated internally.
    pub batch_seeds: Vec<u64>,
    /// `max |X_hat - X*|` for the last recorded batch, when its coefficients are known.
    pub final_coef_max_err: Option<f64>,
}

impl RunResult {
    pub fn last(&self) -> Option<&IterationTrace> {
        self.trace.last()
    }

    /// Writes the trace as CSV. With `with_timing == false` the wall-time
    /// column is written as 0 so reruns produce identical bytes.
    pub fn write_trace_csv<W: Write>(&self, mut w: W, with_timing: bool) -> std::io::Result<()> {
        writeln!(w, "{TRACE_SCHEMA} algorithm={}", self.algorithm)?;
        writeln!(w, "{TRACE_HEADER}")?;
        for row in &self.trace {
            let wall = if with_timing { row.wall_ms } else { 0.0 };
            writeln!(
                w,
                "{},{},{},{},{:e},{},{}",
                row.t,
                opt(row.max_col_err),
                opt(row.rel_frob_a),
                opt(row.rel_frob_x),
                row.fit,
                opt(row.support_acc),
                wall
            )?;
        }
        Ok(())
    }

    pub fn trace_json(&self, with_timing: bool) -> serde_json::Value {
        let rows: Vec<IterationTrace> = self
            .trace
            .iter()
            .cloned()
            .map(|mut r| {
                if !with_timing {
                    r.wall_ms = 0.0;
                }
                r
            })
            .collect();
        serde_json::json!({
            "algorithm": self.algorithm,
            "termination": self.termination,
            "trace": rows,
        })
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Seed of the fresh batch drawn at outer iteration `t`.
pub fn batch_seed(seed: u64, t: usize) -> u64 {
    derive_seed(seed, &[label::BATCH, t as u64])
}

/// The starting dictionary `A(0)` used by [`run_noodl`].
pub fn initial_dictionary(truth: &Dictionary, gen: &GenerativeConfig, seed: u64) -> Result<Dictionary> {
    perturb_dictionary(truth, gen.epsilon0, seed)
}

/// Runs the online algorithm on synthetic data drawn from `truth`.
pub fn run_noodl(truth: &Dictionary, gen: &GenerativeConfig, cfg: &SolverConfig) -> Result<RunResult> {
    run_algorithm(Algorithm::Noodl, truth, gen, cfg)
}

pub fn run_algorithm(
    algorithm: Algorithm,
    truth: &Dictionary,
    gen: &GenerativeConfig,
    cfg: &SolverConfig,
) -> Result<RunResult> {
    gen.validate()?;
    cfg.validate()?;
    if truth.n() != gen.n || truth.m() != gen.m {
        return Err(NoodlError::shape("ground truth does not match the generative config"));
    }
    for w in crate::assumptions::check(truth, gen, cfg) {
        log::warn!("{w}");
    }
    let a0 = initial_dictionary(truth, gen, cfg.seed)?;
    let mut seeds = Vec::new();
    let mut result = drive(algorithm, a0, Some(truth), cfg, |t| {
        let s = batch_seed(cfg.seed, t);
        seeds.push(s);
        generate_batch(truth, cfg.p, gen, s).map(Some)
    })?;
    result.batch_seeds = seeds;
    Ok(result)
}

/// Runs the loop on caller-supplied batches, one per iteration, for at most
/// `cfg.max_iters` iterations. Ground-truth metrics are recorded only when
/// `truth` is given and a batch carries its coefficients.
pub fn run_noodl_with_data(
    a0: Dictionary,
    batches: &[Batch],
    cfg: &SolverConfig,
    truth: Option<&Dictionary>,
) -> Result<RunResult> {
    run_algorithm_with_data(Algorithm::Noodl, a0, batches, cfg, truth)
}

pub fn run_algorithm_with_data(
    algorithm: Algorithm,
    a0: Dictionary,
    batches: &[Batch],
    cfg: &SolverConfig,
    truth: Option<&Dictionary>,
) -> Result<RunResult> {
    cfg.validate()?;
    if batches.is_empty() {
        return Err(NoodlError::Empty("no batches supplied".into()));
    }
    if let Some(t) = truth {
        if t.n() != a0.n() || t.m() != a0.m() {
            return Err(NoodlError::shape("ground truth and initial dictionary differ in shape"));
        }
    }
    drive(algorithm, a0, truth, cfg, |t| Ok(batches.get(t).cloned()))
}

fn drive<F>(
    algorithm: Algorithm,
    a0: Dictionary,
    truth: Option<&Dictionary>,
    cfg: &SolverConfig,
    mut next_batch: F,
) -> Result<RunResult>
where
    F: FnMut(usize) -> Result<Option<Batch>>,
{
    let steps = match algorithm {
        Algorithm::Noodl => cfg.coeff.iht_steps()?,
        Algorithm::BiasedHt => 0,
    };
    let mut a = a0;
    let mut coefficients = SparseCoefficientBatch::zeros(a.m(), 0);
    let mut trace = Vec::new();
    let mut termination = Termination::MaxIters;
    let mut matching: Option<Matching> = truth.map(|t| match_columns(&a, t)).transpose()?;
    let mut prev_fit: Option<f64> = None;
    let mut coef_err = None;

    for t in 0..cfg.max_iters {
        let Some(batch) = next_batch(t)? else {
            termination = Termination::DataExhausted;
            break;
        };
        if batch.y.nrows() != a.n() || batch.p() == 0 {
            return Err(NoodlError::shape(format!(
                "batch {t} is {}x{}, expected {} rows and at least one column",
                batch.y.nrows(),
                batch.p(),
                a.n()
            )));
        }
        let start = Instant::now();
        let x_hat = estimate_with_steps(&a, batch.y.view(), &cfg.coeff, steps)?;
        let grad = empirical_gradient(&a, batch.y.view(), &x_hat)?;
        let stepped = gradient_step(&a, &grad, cfg.eta_a)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;

        let fit = fit_error(batch.y.view(), &a, &x_hat)?;
        let updated = match normalize_columns(stepped) {
            Ok(d) => d,
            Err(NoodlError::DegenerateAtom { atom, norm }) => {
                log::warn!("iteration {t}: atom {atom} collapsed (norm {norm:e})");
                coefficients = x_hat;
                termination = Termination::Degenerate;
                break;
            }
            Err(e) => return Err(e),
        };

        let mut row = IterationTrace {
            t,
            max_col_err: None,
            rel_frob_a: None,
            rel_frob_x: None,
            fit,
            support_acc: None,
            wall_ms,
        };
        let mut next_matching = None;
        if let Some(truth) = truth {
            let mt = match_columns(&updated, truth)?;
            row.max_col_err = Some(mt.max_err());
            row.rel_frob_a = Some(rel_frobenius(updated.matrix(), truth.matrix(), Some(&mt))?);
            if let (Some(x_star), Some(prev)) = (&batch.x_star, &matching) {
                if x_star.frobenius_norm() > 0.0 {
                    row.rel_frob_x = Some(rel_frobenius_coeffs(&x_hat, x_star, Some(prev))?);
                }
                row.support_acc = Some(support_accuracy(&x_hat, x_star, Some(prev))?);
                coef_err = Some(max_abs_coeff_err(&x_hat, x_star, Some(prev))?);
            }
            next_matching = Some(mt);
        }
        log::debug!(
            "{algorithm} t={t} max_col_err={:?} fit={fit:e} ({wall_ms:.1} ms)",
            row.max_col_err
        );
        let dict_done = row.max_col_err.is_some_and(|e| e < cfg.dict_stop);
        let fit_done = truth.is_none() && prev_fit.is_some_and(|p| (p - fit).abs() < FIT_STALL_TOL);
        trace.push(row);
        a = updated;
        coefficients = x_hat;
        matching = next_matching;
        prev_fit = Some(fit);
        if dict_done {
            termination = Termination::DictTol;
            break;
        }
        if fit_done {
            termination = Termination::FitTol;
            break;
        }
    }

    Ok(RunResult {
        algorithm,
        dictionary: a,
        coefficients,
        trace,
        termination,
        batch_seeds: Vec::new(),
        final_coef_max_err: coef_err,
    })
}
