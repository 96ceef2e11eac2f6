//! Synthetic ground truth: Gaussian dictionaries, controlled perturbations
//! and k-sparse coefficient draws.

use ndarray::parallel::prelude::*;
use ndarray::{Array2, Axis, ShapeBuilder};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::dictionary::{norm, Dictionary};
use super::sparse::{SparseCoefficientBatch, SparseVector};
use crate::error::{NoodlError, Result};
use crate::rng::{label, substream};

/// Distribution of the nonzero coefficient values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueDist {
    /// `+C` or `-C` with equal probability.
    Rademacher,
    /// Magnitude uniform on `[lo, hi]`, sign uniform.
    UniformMagnitude { lo: f64, hi: f64 },
}

/// Parameters of the generative model `y = A* x*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Lower bound on nonzero coefficient magnitudes.
    pub c: f64,
    pub value_dist: ValueDist,
    /// Column distance of the initial dictionary from the truth.
    pub epsilon0: f64,
}

impl GenerativeConfig {
    /// Rademacher coefficients with `C = 1` and `epsilon0 = 2 / ln(n)`.
    pub fn standard(n: usize, m: usize, k: usize) -> Self {
        GenerativeConfig {
            n,
            m,
            k,
            c: 1.0,
            value_dist: ValueDist::Rademacher,
            epsilon0: 2.0 / (n as f64).ln(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(NoodlError::config("n and m must be at least 1"));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(NoodlError::config(format!("C must lie in (0, 1], got {}", self.c)));
        }
        if self.k >= self.m || self.k > self.n {
            return Err(NoodlError::config(format!(
                "sparsity k = {} must satisfy k < m = {} and k <= n = {}",
                self.k, self.m, self.n
            )));
        }
        if !(0.0..2.0).contains(&self.epsilon0) {
            return Err(NoodlError::config(format!(
                "epsilon0 must lie in [0, 2), got {}",
                self.epsilon0
            )));
        }
        if let ValueDist::UniformMagnitude { lo, hi } = self.value_dist {
            if !(lo >= self.c && hi >= lo && hi.is_finite()) {
                return Err(NoodlError::config(format!(
                    "uniform magnitude range [{lo}, {hi}] must satisfy C <= lo <= hi"
                )));
            }
        }
        Ok(())
    }
}

/// One mini-batch of observations, with the generating coefficients when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// `n x p`, column-major.
    pub y: Array2<f64>,
    pub x_star: Option<SparseCoefficientBatch>,
}

impl Batch {
    pub fn observed(y: Array2<f64>) -> Self {
        Batch {
            y: super::dictionary::to_column_major(y),
            x_star: None,
        }
    }

    pub fn p(&self) -> usize {
        self.y.ncols()
    }
}

/// I.i.d. standard normal `n x m` matrix with columns scaled to unit norm.
pub fn generate_ground_truth(n: usize, m: usize, seed: u64) -> Result<Dictionary> {
    if n == 0 || m == 0 {
        return Err(NoodlError::config(format!("invalid dictionary size {n}x{m}")));
    }
    let mut mat = Array2::<f64>::zeros((n, m).f());
    mat.axis_iter_mut(Axis(1))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut col)| {
            let mut rng = substream(seed, &[label::GROUND_TRUTH, i as u64]);
            col.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        });
    Dictionary::normalized(mat)
}

/// Moves every atom by exactly `epsilon0` in Euclidean distance along a
/// random Gaussian direction, keeping order and orientation.
///
/// The Gaussian draw is projected off the atom and rescaled so that the
/// renormalized column lands at the requested distance: with angle
/// `theta = 2 asin(epsilon0 / 2)` the new atom is `cos(theta) a + sin(theta) u`.
pub fn perturb_dictionary(a_star: &Dictionary, epsilon0: f64, seed: u64) -> Result<Dictionary> {
    if !(0.0..2.0).contains(&epsilon0) {
        return Err(NoodlError::config(format!(
            "perturbation distance must lie in [0, 2), got {epsilon0}"
        )));
    }
    let n = a_star.n();
    let theta = 2.0 * (epsilon0 / 2.0).asin();
    let (cos_t, sin_t) = (theta.cos(), theta.sin());
    let mut mat = a_star.matrix().to_owned();
    if epsilon0 == 0.0 {
        return Ok(Dictionary::from_raw_unchecked(mat));
    }
    if n == 1 {
        return Err(NoodlError::config("cannot perturb a dictionary with n = 1"));
    }
    mat.axis_iter_mut(Axis(1))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut col)| {
            let mut rng = substream(seed, &[label::PERTURB, i as u64]);
            let a = col.to_owned();
            let u = loop {
                let z: ndarray::Array1<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let u = &z - &(&a * a.dot(&z));
                let nu = norm(u.view());
                if nu > 1e-8 {
                    break u / nu;
                }
            };
            col.assign(&(&a * cos_t + &u * sin_t));
        });
    Dictionary::normalized(mat)
}

/// Draws one k-sparse coefficient vector: a uniformly random k-subset of
/// `[m]` carrying i.i.d. values from `cfg.value_dist`.
pub fn sample_coefficient_vector<R: Rng + ?Sized>(cfg: &GenerativeConfig, rng: &mut R) -> SparseVector {
    let mut support = rand::seq::index::sample(rng, cfg.m, cfg.k).into_vec();
    support.sort_unstable();
    let values = support
        .iter()
        .map(|_| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let magnitude = match cfg.value_dist {
                ValueDist::Rademacher => cfg.c,
                ValueDist::UniformMagnitude { lo, hi } => {
                    if hi > lo {
                        rng.random_range(lo..=hi)
                    } else {
                        lo
                    }
                }
            };
            sign * magnitude
        })
        .collect();
    SparseVector::from_sorted_unchecked(cfg.m, support, values)
}

/// Generates `p` samples `y_j = A* x*_j`. Column `j` draws from its own
/// stream `(seed, j)`, so the batch does not depend on the thread count.
pub fn generate_batch(a_star: &Dictionary, p: usize, cfg: &GenerativeConfig, seed: u64) -> Result<Batch> {
    if a_star.n() != cfg.n || a_star.m() != cfg.m {
        return Err(NoodlError::shape(format!(
            "dictionary is {}x{}, config expects {}x{}",
            a_star.n(),
            a_star.m(),
            cfg.n,
            cfg.m
        )));
    }
    let columns: Vec<SparseVector> = (0..p)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(seed, &[label::SAMPLE, j as u64]);
            sample_coefficient_vector(cfg, &mut rng)
        })
        .collect();
    let mut y = Array2::<f64>::zeros((cfg.n, p).f());
    y.axis_iter_mut(Axis(1))
        .into_par_iter()
        .zip(columns.par_iter())
        .for_each(|(mut yj, xj)| {
            let out = yj.as_slice_memory_order_mut().expect("contiguous column");
            for (i, v) in xj.iter() {
                for (o, a) in out.iter_mut().zip(a_star.atom_slice(i)) {
                    *o += v * a;
                }
            }
        });
    Ok(Batch {
        y,
        x_star: Some(SparseCoefficientBatch::new(cfg.m, columns)?),
    })
}
