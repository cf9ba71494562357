use super::eig::{max_eig_pair, EIG_TOL};
use super::matrix::ZERO_COLUMN_TOL;
use super::{ColumnSubset, DenseMatrix};
use crate::error::{Error, Result};

/// Default relative threshold below which the smallest singular value counts
/// as zero in [`condition_number`].
pub const COND_TOL: f64 = 1e-12;

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.as_dmatrix().norm()
}

/// Largest singular value, from the top eigenvalue of the smaller Gram matrix.
pub fn spectral_norm(a: &DenseMatrix, tol: f64) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 || a.is_zero() {
        return Ok(0.0);
    }
    let gram = if a.nrows() < a.ncols() {
        a.outer_gram()
    } else {
        a.gram()
    };
    let top = max_eig_pair(&gram, tol)?;
    Ok(top.value.max(0.0).sqrt())
}

/// `||A||_F^2 / ||A||^2`.
pub fn stable_rank(a: &DenseMatrix) -> Result<f64> {
    let spec = spectral_norm(a, EIG_TOL)?;
    if spec == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let fro = frobenius_norm(a);
    Ok((fro / spec).powi(2))
}

/// `sigma_max / sigma_min` over all unit vectors, so a matrix with more
/// columns than rows, or with dependent columns, is infinitely conditioned.
///
/// Returns `+inf` when `sigma_min <= tol * sigma_max`. An empty matrix has
/// condition number one.
pub fn condition_number(a: &DenseMatrix, tol: f64) -> f64 {
    if a.ncols() == 0 {
        return 1.0;
    }
    if a.ncols() > a.nrows() {
        return f64::INFINITY;
    }
    let sv = a.as_dmatrix().clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min <= tol * max {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `A^T A - I` for a standardized matrix.
pub fn hollow_gram(a: &DenseMatrix) -> Result<DenseMatrix> {
    a.ensure_standardized()?;
    let mut g = a.gram().into_dmatrix();
    for j in 0..g.nrows() {
        g[(j, j)] = 0.0;
    }
    DenseMatrix::from_dmatrix(g)
}

pub fn column_submatrix(a: &DenseMatrix, tau: &ColumnSubset) -> Result<DenseMatrix> {
    if tau.ambient() != a.ncols() {
        return Err(Error::InvalidSubset(format!(
            "subset indexes {} columns, matrix has {}",
            tau.ambient(),
            a.ncols()
        )));
    }
    let m = a.as_dmatrix().select_columns(tau.indices());
    DenseMatrix::from_dmatrix(m)
}

pub fn principal_submatrix(h: &DenseMatrix, tau: &ColumnSubset) -> Result<DenseMatrix> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    if tau.ambient() != h.ncols() {
        return Err(Error::InvalidSubset(format!(
            "subset indexes {} columns, matrix has {}",
            tau.ambient(),
            h.ncols()
        )));
    }
    let m = h
        .as_dmatrix()
        .select_columns(tau.indices())
        .select_rows(tau.indices());
    DenseMatrix::from_dmatrix(m)
}

/// Scales every column to unit 2-norm.
pub fn standardize(a: &DenseMatrix) -> Result<DenseMatrix> {
    let mut m = a.as_dmatrix().clone();
    for j in 0..m.ncols() {
        let norm = m.column(j).norm();
        if norm <= ZERO_COLUMN_TOL {
            return Err(Error::ZeroColumn { index: j, norm });
        }
        m.column_mut(j).unscale_mut(norm);
    }
    DenseMatrix::from_dmatrix(m)
}
