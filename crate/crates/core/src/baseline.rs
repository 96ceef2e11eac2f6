//! Hard-thresholding-only comparator.
//!
//! Coefficients come from the thresholded correlation `T_{C/2}(A^T y)` with
//! no IHT refinement; the dictionary update, normalization and metrics are
//! shared with NOODL. Its coefficient error, and therefore its gradient,
//! carries a bias that stalls dictionary recovery at a nonzero floor.

use crate::error::Result;
use crate::model::{Dictionary, GenerativeConfig};
use crate::runner::{run_algorithm, Algorithm, RunResult, SolverConfig};

pub fn run_biased_baseline(truth: &Dictionary, gen: &GenerativeConfig, cfg: &SolverConfig) -> Result<RunResult> {
    run_algorithm(Algorithm::BiasedHt, truth, gen, cfg)
}
