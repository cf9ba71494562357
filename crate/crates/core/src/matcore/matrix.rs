use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on column norms for a matrix to count as standardized.
pub const STANDARDIZED_TOL: f64 = 1e-8;

/// Absolute tolerance on `max |h_ij - h_ji|` for a matrix to count as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Columns with 2-norm at or below this are treated as zero by [`standardize`](super::standardize).
pub const ZERO_COLUMN_TOL: f64 = 1e-12;

/// Real dense matrix whose entries are all finite.
///
/// Zero-sized dimensions are allowed so that restricting to an empty column
/// subset is well defined; operations that need a nonempty matrix check for it.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
            return Err(Error::Shape(format!(
                "row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(rows.len(), ncols, &data)
    }

    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NotFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Square diagonal matrix. Panics if an entry is not finite.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        assert!(diag.iter().all(|v| v.is_finite()), "non-finite diagonal");
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn mul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.ncols() != rhs.nrows() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows(),
                self.ncols(),
                rhs.nrows(),
                rhs.ncols()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::Shape(format!(
                "cannot subtract {:?} from {:?}",
                rhs.shape(),
                self.shape()
            )));
        }
        Ok(Self(&self.0 - &rhs.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }

    /// `A^T A`, mirrored from the upper triangle so it is exactly symmetric.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.ncols();
        let mut g = DMatrix::zeros(n, n);
        for j in 0..n {
            let cj = self.0.column(j);
            for i in 0..=j {
                let v = self.0.column(i).dot(&cj);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Self(g)
    }

    /// `A A^T`, exactly symmetric.
    pub fn outer_gram(&self) -> DenseMatrix {
        self.transpose().gram()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.0.column(j).norm()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.ncols()).map(|j| self.column_norm(j)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.nrows()).map(|i| self.row(i)).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let k = self.nrows().min(self.ncols());
        (0..k).map(|i| self.0[(i, i)]).collect()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols(), "vector length mismatch");
        let mut y = vec![0.0; self.nrows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (yi, aij) in y.iter_mut().zip(self.0.column(j).iter()) {
                *yi += aij * xj;
            }
        }
        y
    }

    /// Largest entry of `|A - A^T|`; infinite for non-square input.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.nrows();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..j {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn ensure_symmetric(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.nrows(),
                cols: self.ncols(),
            });
        }
        let asym = self.max_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric {
                max_asymmetry: asym,
            });
        }
        Ok(())
    }

    /// Fails with the first column whose norm is off from one by more than
    /// [`STANDARDIZED_TOL`].
    pub fn ensure_standardized(&self) -> Result<()> {
        for j in 0..self.ncols() {
            let norm = self.column_norm(j);
            if (norm - 1.0).abs() > STANDARDIZED_TOL {
                return Err(Error::NotStandardized { index: j, norm });
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

/// Sorted, duplicate-free set of column indices into a matrix with `ambient`
/// columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ColumnSubset {
    indices: Vec<usize>,
    ambient: usize,
}

impl ColumnSubset {
    pub fn new(indices: Vec<usize>, ambient: usize) -> Result<Self> {
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(format!(
                "indices must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= ambient {
                return Err(Error::InvalidSubset(format!(
                    "index {last} out of range for {ambient} columns"
                )));
            }
        }
        Ok(Self { indices, ambient })
    }

    /// Sorts the indices first; duplicates are still an error.
    pub fn from_unsorted(mut indices: Vec<usize>, ambient: usize) -> Result<Self> {
        indices.sort_unstable();
        Self::new(indices, ambient)
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            indices: (0..ambient).collect(),
            ambient,
        }
    }

    pub fn empty(ambient: usize) -> Self {
        Self {
            indices: Vec::new(),
            ambient,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn is_subset_of(&self, other: &ColumnSubset) -> bool {
        self.ambient == other.ambient && self.indices.iter().all(|&j| other.contains(j))
    }

    /// Maps positions inside `self` (a subset of `0..self.len()`) back to the
    /// ambient index space.
    pub fn compose(&self, local: &ColumnSubset) -> Result<ColumnSubset> {
        if local.ambient != self.len() {
            return Err(Error::InvalidSubset(format!(
                "local subset indexes {} columns, parent has {}",
                local.ambient,
                self.len()
            )));
        }
        let indices = local.indices.iter().map(|&k| self.indices[k]).collect();
        Ok(ColumnSubset {
            indices,
            ambient: self.ambient,
        })
    }
}
