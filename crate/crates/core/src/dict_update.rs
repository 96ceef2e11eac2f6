//! Dictionary update: empirical gradient, descent step, renormalization.

use ndarray::parallel::prelude::*;
use ndarray::{Array2, ArrayView2, Axis, ShapeBuilder};

use crate::error::{NoodlError, Result};
use crate::model::{Dictionary, SparseCoefficientBatch};

/// `(1/p) sum_j (A x_j - y_j) sign(x_j)^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub matrix: Array2<f64>,
    /// Samples that contributed.
    pub p_used: usize,
}

/// Residuals `A x_j - y_j` as the columns of an `n x p` matrix.
pub(crate) fn residuals(a: &Dictionary, y: ArrayView2<'_, f64>, x: &SparseCoefficientBatch) -> Array2<f64> {
    let mut r = Array2::<f64>::zeros(y.raw_dim().f());
    r.axis_iter_mut(Axis(1))
        .into_par_iter()
        .zip(y.axis_iter(Axis(1)).into_par_iter())
        .zip(x.columns().par_iter())
        .for_each(|((mut rj, yj), xj)| {
            let out = rj.as_slice_memory_order_mut().expect("contiguous column");
            for (i, v) in xj.iter() {
                for (o, &ai) in out.iter_mut().zip(a.atom_slice(i)) {
                    *o += v * ai;
                }
            }
            rj.zip_mut_with(&yj, |r, &v| *r -= v);
        });
    r
}

/// Forms the empirical gradient. Each sample only touches the atoms on the
/// support of its coefficient estimate. Atom `s` sums its contributions in
/// sample order, so the result is bit-identical for any thread count.
pub fn empirical_gradient(
    a: &Dictionary,
    y: ArrayView2<'_, f64>,
    x_hat: &SparseCoefficientBatch,
) -> Result<GradientEstimate> {
    let p = y.ncols();
    if p == 0 {
        return Err(NoodlError::Empty("gradient needs at least one sample".into()));
    }
    if y.nrows() != a.n() || x_hat.m() != a.m() || x_hat.p() != p {
        return Err(NoodlError::shape(format!(
            "gradient inputs disagree: A {}x{}, Y {}x{}, X {}x{}",
            a.n(),
            a.m(),
            y.nrows(),
            p,
            x_hat.m(),
            x_hat.p()
        )));
    }
    let resid = residuals(a, y, x_hat);

    let mut users: Vec<Vec<(usize, f64)>> = vec![Vec::new(); a.m()];
    for (j, col) in x_hat.columns().iter().enumerate() {
        for (i, v) in col.iter() {
            if v != 0.0 {
                users[i].push((j, v.signum()));
            }
        }
    }

    let scale = 1.0 / p as f64;
    let mut g = Array2::<f64>::zeros((a.n(), a.m()).f());
    g.axis_iter_mut(Axis(1))
        .into_par_iter()
        .zip(users.par_iter())
        .for_each(|(mut gs, list)| {
            let out = gs.as_slice_memory_order_mut().expect("contiguous column");
            for &(j, sign) in list {
                let rj = resid.column(j);
                let rj = rj.as_slice_memory_order().expect("contiguous column");
                for (o, &r) in out.iter_mut().zip(rj) {
                    *o += sign * r;
                }
            }
            out.iter_mut().for_each(|o| *o *= scale);
        });
    Ok(GradientEstimate { matrix: g, p_used: p })
}

/// `A - eta_A * g`, left unnormalized.
pub fn gradient_step(a: &Dictionary, g: &GradientEstimate, eta_a: f64) -> Result<Array2<f64>> {
    if g.matrix.dim() != (a.n(), a.m()) {
        return Err(NoodlError::shape("gradient shape does not match the dictionary"));
    }
    if !(eta_a >= 0.0) {
        return Err(NoodlError::config(format!("eta_A must be non-negative, got {eta_a}")));
    }
    let mut next = a.matrix().to_owned();
    next.scaled_add(-eta_a, &g.matrix);
    Ok(next)
}

/// Scales every column to unit norm; a near-zero column is a degenerate atom.
pub fn normalize_columns(a: Array2<f64>) -> Result<Dictionary> {
    Dictionary::normalized(a)
}

/// `scale * m / k`.
pub fn default_eta_a(m: usize, k: usize, scale: f64) -> Result<f64> {
    if k == 0 {
        return Err(NoodlError::config("eta_A = scale * m / k needs k >= 1"));
    }
    Ok(scale * m as f64 / k as f64)
}

/// Step-size scale reproducing `eta_A = 30` at `m = 1500, k = 10`.
pub const DEFAULT_ETA_A_SCALE: f64 = 0.2;
