//! Heuristic checks of the regime in which convergence is guaranteed.
//!
//! The guarantees are asymptotic (`O(.)`, `Omega(.)`), so each check uses an
//! explicit constant of 1 unless noted. Violations are reported, never
//! enforced: the algorithm is routinely run outside this regime.

use std::fmt;

use crate::model::{incoherence, Dictionary, GenerativeConfig};
use crate::runner::SolverConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum AssumptionWarning {
    /// `m` should be `O(n)`; flagged beyond `m > 4n`.
    Overcomplete { n: usize, m: usize },
    /// Incoherence above `2 ln n`.
    Coherent { mu: f64, bound: f64 },
    /// Sparsity above `sqrt(n)`.
    TooDense { k: usize, bound: f64 },
    /// Initial distance above `2 / ln n`.
    FarInit { epsilon0: f64, bound: f64 },
    /// `eta_A` outside `[0.05, 5] * m / k`.
    DictStep { eta_a: f64, m_over_k: f64 },
    /// Threshold not below the coefficient floor.
    Threshold { tau: f64, c: f64 },
}

impl fmt::Display for AssumptionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssumptionWarning::Overcomplete { n, m } => write!(f, "m = {m} is large relative to n = {n}"),
            AssumptionWarning::Coherent { mu, bound } => {
                write!(f, "incoherence {mu:.3} exceeds {bound:.3}")
            }
            AssumptionWarning::TooDense { k, bound } => {
                write!(f, "sparsity k = {k} exceeds sqrt(n) = {bound:.2}")
            }
            AssumptionWarning::FarInit { epsilon0, bound } => {
                write!(f, "initial distance {epsilon0:.4} exceeds 2/ln(n) = {bound:.4}")
            }
            AssumptionWarning::DictStep { eta_a, m_over_k } => {
                write!(f, "eta_A = {eta_a} is far from m/k = {m_over_k:.3}")
            }
            AssumptionWarning::Threshold { tau, c } => write!(f, "tau = {tau} is not below C = {c}"),
        }
    }
}

pub fn check(truth: &Dictionary, gen: &GenerativeConfig, cfg: &SolverConfig) -> Vec<AssumptionWarning> {
    let mut out = Vec::new();
    let n = gen.n as f64;
    let ln_n = n.ln().max(f64::MIN_POSITIVE);
    if gen.m > 4 * gen.n {
        out.push(AssumptionWarning::Overcomplete { n: gen.n, m: gen.m });
    }
    let mu = incoherence(truth);
    if mu > 2.0 * ln_n {
        out.push(AssumptionWarning::Coherent { mu, bound: 2.0 * ln_n });
    }
    if gen.k as f64 > n.sqrt() {
        out.push(AssumptionWarning::TooDense {
            k: gen.k,
            bound: n.sqrt(),
        });
    }
    let eps_bound = 2.0 / ln_n;
    if gen.n > 1 && gen.epsilon0 > eps_bound * (1.0 + 1e-12) {
        out.push(AssumptionWarning::FarInit {
            epsilon0: gen.epsilon0,
            bound: eps_bound,
        });
    }
    if gen.k > 0 {
        let m_over_k = gen.m as f64 / gen.k as f64;
        let ratio = cfg.eta_a / m_over_k;
        if !(0.05..=5.0).contains(&ratio) {
            out.push(AssumptionWarning::DictStep {
                eta_a: cfg.eta_a,
                m_over_k,
            });
        }
    }
    if cfg.coeff.tau >= gen.c {
        out.push(AssumptionWarning::Threshold {
            tau: cfg.coeff.tau,
            c: gen.c,
        });
    }
    out
}
