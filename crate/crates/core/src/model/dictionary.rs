use ndarray::{Array2, ArrayView1, ArrayView2, Axis, ShapeBuilder};

use crate::error::{NoodlError, Result};

/// Tolerance on `| ||A_i|| - 1 |` for a matrix to count as a dictionary.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Columns with a norm below this cannot be normalized.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// An `n x m` matrix with unit-norm columns (atoms).
///
/// Storage is column-major so each atom is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Array2<f64>,
}

impl Dictionary {
    /// Wraps a matrix whose columns are already unit norm.
    pub fn from_unit_columns(mat: Array2<f64>) -> Result<Self> {
        let (n, m) = mat.dim();
        if n == 0 || m == 0 {
            return Err(NoodlError::shape(format!("dictionary must be non-empty, got {n}x{m}")));
        }
        for (column, col) in mat.axis_iter(Axis(1)).enumerate() {
            let deviation = (norm(col) - 1.0).abs();
            if !(deviation <= UNIT_NORM_TOL) {
                return Err(NoodlError::NotNormalized { column, deviation });
            }
        }
        Ok(Dictionary {
            atoms: to_column_major(mat),
        })
    }

    /// Scales every column to unit norm.
    pub fn normalized(mat: Array2<f64>) -> Result<Self> {
        let (n, m) = mat.dim();
        if n == 0 || m == 0 {
            return Err(NoodlError::shape(format!("dictionary must be non-empty, got {n}x{m}")));
        }
        let mut atoms = to_column_major(mat);
        for (atom, mut col) in atoms.axis_iter_mut(Axis(1)).enumerate() {
            let nrm = norm(col.view());
            if !(nrm >= DEGENERATE_NORM) {
                return Err(NoodlError::DegenerateAtom { atom, norm: nrm });
            }
            col.mapv_inplace(|v| v / nrm);
        }
        Ok(Dictionary { atoms })
    }

    pub(crate) fn from_raw_unchecked(atoms: Array2<f64>) -> Self {
        Dictionary {
            atoms: to_column_major(atoms),
        }
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.atoms.nrows()
    }

    /// Number of atoms.
    pub fn m(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn atom(&self, i: usize) -> ArrayView1<'_, f64> {
        self.atoms.column(i)
    }

    /// Atom `i` as a contiguous slice.
    pub fn atom_slice(&self, i: usize) -> &[f64] {
        let n = self.n();
        let data = self.atoms.as_slice_memory_order().expect("column-major storage");
        &data[i * n..(i + 1) * n]
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.atoms.view()
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.atoms
    }

    /// Largest `| ||A_i|| - 1 |` over all atoms.
    pub fn max_norm_deviation(&self) -> f64 {
        self.atoms
            .axis_iter(Axis(1))
            .map(|c| (norm(c) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Copies into Fortran (column-major) layout unless already there.
pub(crate) fn to_column_major(mat: Array2<f64>) -> Array2<f64> {
    if mat.t().is_standard_layout() {
        return mat;
    }
    let mut out = Array2::zeros(mat.dim().f());
    out.assign(&mat);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn normalizes_columns() {
        let d = Dictionary::normalized(array![[3.0, 0.0], [4.0, 2.0], [0.0, 0.0]]).unwrap();
        assert_eq!(d.atom(0).to_vec(), vec![0.6, 0.8, 0.0]);
        assert_eq!(d.atom(1).to_vec(), vec![0.0, 1.0, 0.0]);
        assert_eq!(d.atom_slice(1), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_non_unit_columns() {
        let err = Dictionary::from_unit_columns(array![[1.0, 0.5], [0.0, 0.5]]).unwrap_err();
        assert!(matches!(err, NoodlError::NotNormalized { column: 1, .. }));
    }

    #[test]
    fn degenerate_column_is_an_error() {
        let err = Dictionary::normalized(array![[1.0, 0.0], [0.0, 1e-16]]).unwrap_err();
        assert!(matches!(err, NoodlError::DegenerateAtom { atom: 1, .. }));
    }

    #[test]
    fn nan_column_is_degenerate() {
        assert!(Dictionary::normalized(array![[f64::NAN], [1.0]]).is_err());
    }
}
