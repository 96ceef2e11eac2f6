//! Online dictionary learning by alternating IHT-based coefficient
//! estimation with approximate gradient steps on the dictionary.
//!
//! The crate contains the solver ([`coeff`], [`dict_update`], [`runner`]),
//! a synthetic generative model ([`model`]), recovery metrics
//! ([`metrics`]), a thresholding-only baseline ([`baseline`]) and the
//! experiment harness driving the `noodl` binary ([`harness`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assumptions;
pub mod baseline;
pub mod coeff;
pub mod dict_update;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod persist;
pub mod rng;
pub mod runner;

pub use error::{NoodlError, Result};
pub use model::{Batch, Dictionary, GenerativeConfig, SparseCoefficientBatch, SparseVector, ValueDist};
pub use runner::{run_noodl, run_noodl_with_data, Algorithm, IterationTrace, RunResult, SolverConfig, Termination};
