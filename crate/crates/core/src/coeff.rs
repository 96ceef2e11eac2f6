//! Coefficient estimation: hard-thresholded correlation followed by
//! iterative hard thresholding (IHT) against the current dictionary.

use ndarray::parallel::prelude::*;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{NoodlError, Result};
use crate::model::{Dictionary, SparseCoefficientBatch, SparseVector};

/// Columns per work unit in [`estimate_coefficients`].
const CHUNK: usize = 256;

/// How many IHT steps to take per sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IhtSteps {
    /// Exactly `R` steps (modulo the stall exit).
    Fixed(usize),
    /// Smallest `R` with `(1 - eta_x)^R <= delta_R`.
    Decay(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSolverConfig {
    /// IHT step size.
    pub eta_x: f64,
    /// IHT threshold.
    pub tau: f64,
    pub steps: IhtSteps,
    /// Magnitude floor of the nonzero coefficients; the initial threshold is `c / 2`.
    pub c: f64,
    /// A column stops once no entry moves by more than this in one step.
    pub stall_tol: f64,
}

impl Default for CoeffSolverConfig {
    fn default() -> Self {
        CoeffSolverConfig {
            eta_x: 0.2,
            tau: 0.1,
            steps: IhtSteps::Decay(1e-15),
            c: 1.0,
            stall_tol: 1e-12,
        }
    }
}

impl CoeffSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_x > 0.0 && self.eta_x < 1.0) {
            return Err(NoodlError::config(format!(
                "eta_x must lie in (0, 1), got {}",
                self.eta_x
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(NoodlError::config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(NoodlError::config(format!("C must lie in (0, 1], got {}", self.c)));
        }
        if !(self.stall_tol >= 0.0) {
            return Err(NoodlError::config("stall_tol must be non-negative"));
        }
        self.iht_steps().map(|_| ())
    }

    /// Resolved IHT iteration count `R`.
    pub fn iht_steps(&self) -> Result<usize> {
        match self.steps {
            IhtSteps::Fixed(0) => Err(NoodlError::config("IHT step count R must be at least 1")),
            IhtSteps::Fixed(r) => Ok(r),
            IhtSteps::Decay(delta) => derive_r(delta, self.eta_x),
        }
    }
}

/// Smallest integer `R` with `(1 - eta_x)^R <= delta_r`.
pub fn derive_r(delta_r: f64, eta_x: f64) -> Result<usize> {
    if !(delta_r > 0.0 && delta_r < 1.0) {
        return Err(NoodlError::config(format!("delta_R must lie in (0, 1), got {delta_r}")));
    }
    if !(eta_x > 0.0 && eta_x < 1.0) {
        return Err(NoodlError::config(format!("eta_x must lie in (0, 1), got {eta_x}")));
    }
    let rate = 1.0 - eta_x;
    let mut r = (delta_r.ln() / rate.ln()).ceil().max(1.0) as usize;
    // The logarithm ratio can land a hair off an integer; settle on the exact minimum.
    while r > 1 && rate.powi(r as i32 - 1) <= delta_r {
        r -= 1;
    }
    while rate.powi(r as i32) > delta_r {
        r += 1;
    }
    Ok(r)
}

/// `T_tau(z)`: entries with `|z_i| >= tau` are kept, the rest zeroed.
pub fn hard_threshold(z: ArrayView1<'_, f64>, tau: f64) -> Array1<f64> {
    z.mapv(|v| if v.abs() >= tau { v } else { 0.0 })
}

/// Signs of the nonzero entries of a vector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignedSupport {
    len: usize,
    entries: Vec<(usize, i8)>,
}

impl SignedSupport {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn entries(&self) -> &[(usize, i8)] {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<i8> {
        self.entries
            .binary_search_by_key(&i, |&(j, _)| j)
            .ok()
            .map(|pos| self.entries[pos].1)
    }
}

pub fn signed_support(x: &SparseVector) -> SignedSupport {
    SignedSupport {
        len: x.len(),
        entries: x
            .iter()
            .filter(|&(_, v)| v != 0.0)
            .map(|(i, v)| (i, if v > 0.0 { 1 } else { -1 }))
            .collect(),
    }
}

/// Initial estimate `T_{C/2}(A^T y)`.
pub fn init_coefficients(a: &Dictionary, y: ArrayView1<'_, f64>, c: f64) -> Result<SparseVector> {
    if y.len() != a.n() {
        return Err(NoodlError::shape(format!(
            "sample has length {}, expected {}",
            y.len(),
            a.n()
        )));
    }
    let corr = a.matrix().t().dot(&y);
    Ok(SparseVector::from_dense(hard_threshold(corr.view(), c / 2.0).view()))
}

/// One IHT update `T_tau(x - eta_x A^T (A x - y))`, computed through the
/// explicit residual.
pub fn iht_step(
    a: &Dictionary,
    y: ArrayView1<'_, f64>,
    x: &SparseVector,
    eta_x: f64,
    tau: f64,
) -> Result<SparseVector> {
    if y.len() != a.n() || x.len() != a.m() {
        return Err(NoodlError::shape(
            "sample or coefficient length does not match the dictionary",
        ));
    }
    let mut residual = y.mapv(|v| -v);
    for (i, v) in x.iter() {
        residual.scaled_add(v, &a.atom(i));
    }
    let mut z = a.matrix().t().dot(&residual);
    z.mapv_inplace(|g| -eta_x * g);
    for (i, v) in x.iter() {
        z[i] += v;
    }
    Ok(SparseVector::from_dense(hard_threshold(z.view(), tau).view()))
}

/// Estimates the coefficients of every column of `y` (`n x p`): the
/// thresholded initialization followed by `R` IHT steps with fixed
/// `eta_x` and `tau`, each column exiting early once it stalls.
pub fn estimate_coefficients(
    a: &Dictionary,
    y: ArrayView2<'_, f64>,
    cfg: &CoeffSolverConfig,
) -> Result<SparseCoefficientBatch> {
    cfg.validate()?;
    estimate_with_steps(a, y, cfg, cfg.iht_steps()?)
}

/// Same as [`estimate_coefficients`] with an explicit step count; zero
/// steps returns the thresholded initialization alone.
pub(crate) fn estimate_with_steps(
    a: &Dictionary,
    y: ArrayView2<'_, f64>,
    cfg: &CoeffSolverConfig,
    steps: usize,
) -> Result<SparseCoefficientBatch> {
    if y.nrows() != a.n() {
        return Err(NoodlError::shape(format!(
            "batch has {} rows, dictionary has {}",
            y.nrows(),
            a.n()
        )));
    }
    let m = a.m();
    let p = y.ncols();
    // A^T (A x - y) = G x - A^T y with G = A^T A, which lets each IHT step
    // touch only the columns of G on the current support.
    let gram = if steps > 0 { Some(Gram::new(a)) } else { None };
    let chunks: Vec<usize> = (0..p).step_by(CHUNK).collect();
    let columns: Vec<Vec<SparseVector>> = chunks
        .into_par_iter()
        .map(|start| {
            let end = (start + CHUNK).min(p);
            let corr = a.matrix().t().dot(&y.slice(s![.., start..end]));
            corr.axis_iter(Axis(1))
                .map(|b| {
                    let b = b.to_vec();
                    match &gram {
                        Some(g) => refine_column(g, &b, cfg, steps),
                        None => threshold_to_sparse(&b, cfg.c / 2.0),
                    }
                })
                .collect()
        })
        .collect();
    let columns = columns.into_iter().flatten().collect();
    SparseCoefficientBatch::new(m, columns)
}

fn threshold_to_sparse(z: &[f64], tau: f64) -> SparseVector {
    let (indices, values) = z
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0 && v.abs() >= tau)
        .map(|(i, &v)| (i, v))
        .unzip();
    SparseVector::from_sorted_unchecked(z.len(), indices, values)
}

/// Gram matrix `G = A^T A` with, per column, the largest off-diagonal magnitude.
struct Gram {
    g: Array2<f64>,
    off_diag_max: Vec<f64>,
}

impl Gram {
    fn new(a: &Dictionary) -> Self {
        let g = a.matrix().t().dot(&a.matrix());
        let off_diag_max = g
            .axis_iter(Axis(1))
            .enumerate()
            .map(|(s, col)| {
                col.iter()
                    .enumerate()
                    .filter(|&(i, _)| i != s)
                    .fold(0.0f64, |mx, (_, v)| mx.max(v.abs()))
            })
            .collect();
        Gram { g, off_diag_max }
    }
}

/// Absolute slack kept on top of the drift bound before an off-support
/// entry is trusted to stay below the threshold.
const SLACK_MARGIN: f64 = 1e-9;

/// Runs the initialization and up to `steps` IHT updates for one column
/// given `b = A^T y`.
///
/// A full step evaluates `z = x + eta (b - G x)` for every entry. While the
/// support is unchanged, an off-support entry can move by at most
/// `eta * max|G_is| * ||x - x_ref||_1` away from its value at the last full
/// step, so as long as that drift stays inside the observed gap to `tau` the
/// off-support entries are known to threshold to zero and only the support
/// entries are recomputed. Support entries use the same operation order as
/// a full step, so results are identical either way.
fn refine_column(gram: &Gram, b: &[f64], cfg: &CoeffSolverConfig, steps: usize) -> SparseVector {
    let m = b.len();
    let g = gram.g.as_slice_memory_order().expect("contiguous gram matrix");
    let (eta, tau) = (cfg.eta_x, cfg.tau);

    let mut x = vec![0.0; m];
    let mut support: Vec<usize> = Vec::new();
    for (i, &v) in b.iter().enumerate() {
        if v != 0.0 && v.abs() >= cfg.c / 2.0 {
            x[i] = v;
            support.push(i);
        }
    }
    let mut z = vec![0.0; m];
    // State of the last full step: its input support and values, and the
    // gap between tau and the largest off-support magnitude.
    let mut ref_support: Vec<usize> = Vec::new();
    let mut ref_x: Vec<f64> = Vec::new();
    let mut slack = f64::NEG_INFINITY;
    let mut g_max = 0.0f64;

    for _ in 0..steps {
        let fast = support == ref_support && {
            let drift: f64 = support.iter().zip(&ref_x).map(|(&s, &r)| (x[s] - r).abs()).sum();
            eta * g_max * drift + SLACK_MARGIN < slack
        };

        let mut change = 0.0f64;
        if fast {
            for &i in &support {
                z[i] = x[i] + eta * b[i];
            }
            for &s in &support {
                let w = eta * x[s];
                let col = &g[s * m..(s + 1) * m];
                for &i in &support {
                    z[i] -= w * col[i];
                }
            }
            let mut kept = Vec::with_capacity(support.len());
            for &i in &support {
                let next = if z[i].abs() >= tau { z[i] } else { 0.0 };
                change = change.max((next - x[i]).abs());
                x[i] = next;
                if next != 0.0 {
                    kept.push(i);
                }
            }
            support = kept;
        } else {
            for ((zi, &xi), &bi) in z.iter_mut().zip(&x).zip(b) {
                *zi = xi + eta * bi;
            }
            for &s in &support {
                let w = eta * x[s];
                // G is symmetric, so column s doubles as row s.
                for (zi, &gi) in z.iter_mut().zip(&g[s * m..(s + 1) * m]) {
                    *zi -= w * gi;
                }
            }
            ref_x = support.iter().map(|&s| x[s]).collect();
            g_max = support.iter().map(|&s| gram.off_diag_max[s]).fold(0.0, f64::max);
            let mut off_max = 0.0f64;
            let mut in_ref = ref_support_mask(&support, m);
            let old_support = std::mem::take(&mut support);
            for (i, (xi, &zi)) in x.iter_mut().zip(&z).enumerate() {
                let next = if zi.abs() >= tau { zi } else { 0.0 };
                change = change.max((next - *xi).abs());
                *xi = next;
                if next != 0.0 {
                    support.push(i);
                }
                if !in_ref[i] {
                    off_max = off_max.max(zi.abs());
                }
            }
            in_ref.clear();
            slack = tau - off_max;
            ref_support = old_support;
        }
        if change < cfg.stall_tol {
            break;
        }
    }
    let values = support.iter().map(|&i| x[i]).collect();
    SparseVector::from_sorted_unchecked(m, support, values)
}

fn ref_support_mask(support: &[usize], m: usize) -> Vec<bool> {
    let mut mask = vec![false; m];
    for &s in support {
        mask[s] = true;
    }
    mask
}
