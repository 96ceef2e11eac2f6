use ndarray::{Array1, Array2, ArrayView1, ShapeBuilder};

use crate::error::{NoodlError, Result};

/// A length-`m` vector stored as `(index, value)` pairs with strictly
/// increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    len: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(len: usize) -> Self {
        SparseVector {
            len,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from parallel index/value lists. Indices must be strictly
    /// increasing and below `len`.
    pub fn new(len: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(NoodlError::shape("index and value lists differ in length"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NoodlError::shape("sparse indices must be strictly increasing"));
        }
        if indices.last().is_some_and(|&i| i >= len) {
            return Err(NoodlError::shape(format!("sparse index out of range for length {len}")));
        }
        Ok(SparseVector { len, indices, values })
    }

    pub(crate) fn from_sorted_unchecked(len: usize, indices: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        SparseVector { len, indices, values }
    }

    /// Keeps the nonzero entries of a dense vector.
    pub fn from_dense(dense: ArrayView1<'_, f64>) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .unzip();
        SparseVector {
            len: dense.len(),
            indices,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, i: usize) -> f64 {
        match self.indices.binary_search(&i) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Array1<f64> {
        let mut out = Array1::zeros(self.len);
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        SparseVector {
            len: self.len,
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// An `m x p` coefficient matrix kept as `p` sparse columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficientBatch {
    m: usize,
    columns: Vec<SparseVector>,
}

impl SparseCoefficientBatch {
    pub fn new(m: usize, columns: Vec<SparseVector>) -> Result<Self> {
        if let Some(bad) = columns.iter().position(|c| c.len() != m) {
            return Err(NoodlError::shape(format!(
                "column {bad} has length {}, expected {m}",
                columns[bad].len()
            )));
        }
        Ok(SparseCoefficientBatch { m, columns })
    }

    pub fn zeros(m: usize, p: usize) -> Self {
        SparseCoefficientBatch {
            m,
            columns: vec![SparseVector::zeros(m); p],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[SparseVector] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &SparseVector {
        &self.columns[j]
    }

    /// Largest support size over all columns.
    pub fn max_nnz(&self) -> usize {
        self.columns.iter().map(SparseVector::nnz).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.m, self.p()).f());
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col.iter() {
                out[[i, j]] = v;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.columns
            .iter()
            .flat_map(|c| c.values().iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_unsorted_indices() {
        assert!(SparseVector::new(5, vec![3, 1], vec![1.0, 2.0]).is_err());
        assert!(SparseVector::new(5, vec![1, 1], vec![1.0, 2.0]).is_err());
        assert!(SparseVector::new(5, vec![5], vec![1.0]).is_err());
        assert!(SparseVector::new(5, vec![0, 4], vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn dense_round_trip_drops_zeros() {
        let v = SparseVector::from_dense(array![0.0, -2.0, 0.0, 0.5].view());
        assert_eq!(v.indices(), &[1, 3]);
        assert_eq!(v.get(1), -2.0);
        assert_eq!(v.get(2), 0.0);
        assert_eq!(v.to_dense(), array![0.0, -2.0, 0.0, 0.5]);
    }

    #[test]
    fn batch_checks_lengths() {
        assert!(SparseCoefficientBatch::new(3, vec![SparseVector::zeros(4)]).is_err());
        let b = SparseCoefficientBatch::zeros(3, 2);
        assert_eq!((b.m(), b.p(), b.max_nnz()), (3, 2, 0));
    }
}
