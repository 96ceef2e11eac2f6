//! Recovery and fit metrics. Anything compared against ground truth goes
//! through the column matching first, so permuted or sign-flipped atoms
//! are not counted as errors.

use ndarray::ArrayView2;

use crate::coeff::signed_support;
use crate::dict_update::residuals;
use crate::error::{NoodlError, Result};
use crate::model::{match_columns, Dictionary, Matching, SparseCoefficientBatch, SparseVector};

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnErrors {
    pub max: f64,
    pub mean: f64,
    pub per_atom: Vec<f64>,
    pub matching: Matching,
}

/// Per-atom distances `|| sigma(i) A_hat[pi(i)] - A*_i ||` under the greedy matching.
pub fn column_errors(a_hat: &Dictionary, a_star: &Dictionary) -> Result<ColumnErrors> {
    let matching = match_columns(a_hat, a_star)?;
    Ok(column_errors_from(matching))
}

pub(crate) fn column_errors_from(matching: Matching) -> ColumnErrors {
    let per_atom = matching.col_err.clone();
    let mean = per_atom.iter().sum::<f64>() / per_atom.len().max(1) as f64;
    ColumnErrors {
        max: matching.max_err(),
        mean,
        per_atom,
        matching,
    }
}

/// `||M_hat - M*||_F / ||M*||_F`, with the columns of `m_hat` aligned by
/// `matching` when one is given.
pub fn rel_frobenius(
    m_hat: ArrayView2<'_, f64>,
    m_star: ArrayView2<'_, f64>,
    matching: Option<&Matching>,
) -> Result<f64> {
    if m_hat.dim() != m_star.dim() {
        return Err(NoodlError::shape(format!("{:?} vs {:?}", m_hat.dim(), m_star.dim())));
    }
    let denom = frob(m_star);
    if denom == 0.0 {
        return Err(NoodlError::Empty("reference matrix has zero Frobenius norm".into()));
    }
    let num = match matching {
        Some(mt) => {
            if mt.perm.len() != m_star.ncols() {
                return Err(NoodlError::shape("matching size does not match column count"));
            }
            frob((mt.align(m_hat) - m_star).view())
        }
        None => frob((&m_hat - &m_star).view()),
    };
    Ok(num / denom)
}

fn frob(m: ArrayView2<'_, f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Rows of `x_hat` moved into the truth's frame: row `i` of the result is
/// `sigma(i)` times row `pi(i)` of `x_hat`. This is the dual of aligning the
/// dictionary columns, so `A X` is unchanged.
pub fn align_coefficients(x_hat: &SparseCoefficientBatch, matching: &Matching) -> Result<SparseCoefficientBatch> {
    if matching.perm.len() != x_hat.m() {
        return Err(NoodlError::shape("matching size does not match coefficient rows"));
    }
    if matching.is_identity() {
        return Ok(x_hat.clone());
    }
    let inv = matching.inverse();
    let cols = x_hat
        .columns()
        .iter()
        .map(|c| {
            let mut entries: Vec<(usize, f64)> = c
                .iter()
                .map(|(r, v)| {
                    let i = inv[r];
                    (i, v * matching.signs[i])
                })
                .collect();
            entries.sort_unstable_by_key(|e| e.0);
            let (idx, val) = entries.into_iter().unzip();
            SparseVector::from_sorted_unchecked(x_hat.m(), idx, val)
        })
        .collect();
    SparseCoefficientBatch::new(x_hat.m(), cols)
}

fn same_shape(a: &SparseCoefficientBatch, b: &SparseCoefficientBatch) -> Result<()> {
    if a.m() != b.m() || a.p() != b.p() {
        return Err(NoodlError::shape(format!(
            "coefficient batches {}x{} and {}x{} differ",
            a.m(),
            a.p(),
            b.m(),
            b.p()
        )));
    }
    Ok(())
}

fn sparse_diff_sq(a: &SparseVector, b: &SparseVector) -> f64 {
    let mut acc = 0.0;
    sparse_diff_for_each(a, b, |d| acc += d * d);
    acc
}

fn sparse_diff_for_each(a: &SparseVector, b: &SparseVector, mut f: impl FnMut(f64)) {
    let (ai, av, bi, bv) = (a.indices(), a.values(), b.indices(), b.values());
    let (mut p, mut q) = (0, 0);
    while p < ai.len() || q < bi.len() {
        let d = if q == bi.len() || (p < ai.len() && ai[p] < bi[q]) {
            p += 1;
            av[p - 1]
        } else if p == ai.len() || bi[q] < ai[p] {
            q += 1;
            -bv[q - 1]
        } else {
            p += 1;
            q += 1;
            av[p - 1] - bv[q - 1]
        };
        f(d);
    }
}

fn aligned_or<'a>(
    x_hat: &'a SparseCoefficientBatch,
    matching: Option<&Matching>,
    slot: &'a mut Option<SparseCoefficientBatch>,
) -> Result<&'a SparseCoefficientBatch> {
    match matching {
        Some(mt) => Ok(slot.insert(align_coefficients(x_hat, mt)?)),
        None => Ok(x_hat),
    }
}

/// Largest entrywise error `max |X_hat - X*|`, rows aligned by `matching`.
pub fn max_abs_coeff_err(
    x_hat: &SparseCoefficientBatch,
    x_star: &SparseCoefficientBatch,
    matching: Option<&Matching>,
) -> Result<f64> {
    same_shape(x_hat, x_star)?;
    let mut slot = None;
    let x_hat = aligned_or(x_hat, matching, &mut slot)?;
    let mut worst = 0.0f64;
    for (a, b) in x_hat.columns().iter().zip(x_star.columns()) {
        sparse_diff_for_each(a, b, |d| worst = worst.max(d.abs()));
    }
    Ok(worst)
}

/// Relative Frobenius error of a coefficient estimate, rows aligned by
/// `matching` when given.
pub fn rel_frobenius_coeffs(
    x_hat: &SparseCoefficientBatch,
    x_star: &SparseCoefficientBatch,
    matching: Option<&Matching>,
) -> Result<f64> {
    same_shape(x_hat, x_star)?;
    let denom = x_star.frobenius_norm();
    if denom == 0.0 {
        return Err(NoodlError::Empty("reference coefficients are all zero".into()));
    }
    let mut slot = None;
    let x_hat = aligned_or(x_hat, matching, &mut slot)?;
    let num: f64 = x_hat
        .columns()
        .iter()
        .zip(x_star.columns())
        .map(|(a, b)| sparse_diff_sq(a, b))
        .sum();
    Ok(num.sqrt() / denom)
}

/// `||Y - A X||_F / ||Y||_F`.
pub fn fit_error(y: ArrayView2<'_, f64>, a: &Dictionary, x: &SparseCoefficientBatch) -> Result<f64> {
    if y.nrows() != a.n() || x.m() != a.m() || x.p() != y.ncols() {
        return Err(NoodlError::shape("fit inputs have inconsistent shapes"));
    }
    let denom = frob(y);
    if denom == 0.0 {
        return Err(NoodlError::Empty("observations are all zero".into()));
    }
    Ok(frob(residuals(a, y, x).view()) / denom)
}

/// Fraction of columns whose signed support equals the truth's exactly.
pub fn support_accuracy(
    x_hat: &SparseCoefficientBatch,
    x_star: &SparseCoefficientBatch,
    matching: Option<&Matching>,
) -> Result<f64> {
    same_shape(x_hat, x_star)?;
    if x_star.p() == 0 {
        return Ok(1.0);
    }
    let mut slot = None;
    let x_hat = aligned_or(x_hat, matching, &mut slot)?;
    let hits = x_hat
        .columns()
        .iter()
        .zip(x_star.columns())
        .filter(|(a, b)| signed_support(a) == signed_support(b))
        .count();
    Ok(hits as f64 / x_star.p() as f64)
}
