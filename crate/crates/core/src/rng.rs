//! Seed derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream keyed by a
//! root seed plus a path of labels (purpose, iteration, column, ...). Streams
//! for distinct paths never overlap, so results do not depend on how work is
//! split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Purpose labels used as the first element of a derivation path.
pub mod label {
    pub const GROUND_TRUTH: u64 = 0x4754;
    pub const PERTURB: u64 = 0x5054;
    pub const BATCH: u64 = 0x4254;
    pub const SAMPLE: u64 = 0x534d;
    pub const TRIAL: u64 = 0x5452;
    pub const POWER_ITER: u64 = 0x5057;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a label path into a child seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

/// A generator for the stream identified by `(seed, path)`.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(seed, path))
}
