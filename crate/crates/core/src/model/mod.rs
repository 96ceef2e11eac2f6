//! Generative model, dictionary types and structural checks.

mod closeness;
mod dictionary;
mod sparse;
mod synth;

pub use closeness::{
    check_closeness, incoherence, match_columns, spectral_norm, ClosenessReport, Matching, POWER_ITERS, POWER_TOL,
};
pub use dictionary::{Dictionary, DEGENERATE_NORM, UNIT_NORM_TOL};
pub use sparse::{SparseCoefficientBatch, SparseVector};
pub use synth::{
    generate_batch, generate_ground_truth, perturb_dictionary, sample_coefficient_vector, Batch, GenerativeConfig,
    ValueDist,
};
