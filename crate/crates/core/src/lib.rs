//! Randomized column subset selection with conditioning guarantees.
//!
//! The selection algorithms sample a random set of columns, factor the
//! sample (Pietsch `B = T D` for the norm-reduction variant, Grothendieck
//! `G = D T D` of the hollow Gram matrix for the conditioning variant), and
//! keep the columns whose diagonal weight is small. The factorizations come
//! from eigenvalue minimization over the probability simplex solved by
//! entropic mirror descent; the same machinery yields certified brackets for
//! the NP-hard `(inf,2)` and `(inf,1)` norms.

pub mod emd;
mod error;
pub mod experiments;
pub mod factor;
pub mod grothendieck;
pub mod matcore;
pub mod pietsch;
pub mod select;

pub use error::{Error, Result};
pub use factor::{Bracket, DiagonalWeights, FactorizeOptions, K_G_UPPER, K_P};
pub use matcore::{ColumnSubset, DenseMatrix};
