//! Dense matrices, the norms used by the selection algorithms, a symmetric
//! extreme-eigenpair solver, and brute-force oracles for the NP-hard norms.

mod eig;
mod matrix;
mod norms;
mod oracle;

pub use eig::{max_eig_pair, EigPair, EIG_TOL};
pub(crate) use eig::top_pair;
pub use matrix::{ColumnSubset, DenseMatrix, STANDARDIZED_TOL, SYMMETRY_TOL, ZERO_COLUMN_TOL};
pub use norms::{
    column_submatrix, condition_number, frobenius_norm, hollow_gram, principal_submatrix,
    spectral_norm, stable_rank, standardize, COND_TOL,
};
pub use oracle::{
    inf1_at, inf2_at, norm_inf1_exact, norm_inf1_exact_capped, norm_inf2_exact,
    norm_inf2_exact_capped, sign_vector, ENUMERATION_CAP,
};
pub(crate) use oracle::local_ascent;
