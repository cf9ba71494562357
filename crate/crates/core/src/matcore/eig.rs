use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Default relative residual tolerance for extreme eigenpairs.
pub const EIG_TOL: f64 = 1e-10;

/// Algebraically largest eigenvalue of a symmetric matrix with a unit
/// eigenvector and the residual `||H v - value v||_2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Top eigenpair of a symmetric matrix.
///
/// Fails on asymmetric input and when the residual exceeds
/// `tol * max(1, ||H||_F)`.
pub fn max_eig_pair(h: &DenseMatrix, tol: f64) -> Result<EigPair> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    h.ensure_symmetric()?;
    if h.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix has no eigenvalues".into()));
    }
    let (value, vector) = top_pair(h.as_dmatrix())?;
    let residual = residual(h.as_dmatrix(), value, &vector);
    let scale = h.as_dmatrix().norm().max(1.0);
    if residual > tol * scale {
        return Err(Error::NoConvergence {
            what: "symmetric eigensolver",
            iterations: 0,
        });
    }
    Ok(EigPair {
        value,
        vector: vector.iter().copied().collect(),
        residual,
    })
}

/// Top eigenpair of a matrix the caller already knows to be symmetric.
///
/// The sign of the vector is fixed so that its largest-magnitude entry is
/// positive, which keeps results reproducible.
pub(crate) fn top_pair(m: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 200 * n.max(1)).ok_or(
        Error::NoConvergence {
            what: "symmetric eigensolver",
            iterations: 200 * n.max(1),
        },
    )?;
    let (k, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let mut v = eig.eigenvectors.column(k).into_owned();
    let norm = v.norm();
    v /= norm;
    let lead = v.iter().copied().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if lead < 0.0 {
        v.neg_mut();
    }
    Ok((value, v))
}

fn residual(m: &DMatrix<f64>, value: f64, v: &DVector<f64>) -> f64 {
    (m * v - v * value).norm()
}
