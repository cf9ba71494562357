//! Pieces shared by the Pietsch and Grothendieck factorizations: diagonal
//! weights, solver options, and the certified norm bracket search.

use serde::Serialize;

use crate::emd::StepMode;
use crate::error::{Error, Result};
use crate::matcore::local_ascent;

/// Real Pietsch constant `sqrt(pi / 2)`.
pub const K_P: f64 = 1.253_314_137_315_500_3;

/// Upper bound `pi / (2 log(1 + sqrt 2))` on the real Grothendieck constant.
pub const K_G_UPPER: f64 = 1.782_213_978_191_369_3;

/// Weights at or below this are treated as exact zeros.
pub const EPS_DIAG: f64 = 1e-10;

/// A column (or row) paired with a vanished weight must be this small
/// relative to the Frobenius norm of the whole matrix.
pub const ZERO_COLUMN_REL: f64 = 1e-6;

/// Relative slack added to a positive objective value before rescaling so the
/// bound on `||T||` survives eigensolver rounding.
pub(crate) const ETA_MARGIN: f64 = 1e-12;

/// Nonnegative diagonal `D` with `trace(D^2) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalWeights {
    diag: Vec<f64>,
}

impl DiagonalWeights {
    /// Square roots of simplex weights.
    pub fn from_squares(squares: &[f64]) -> Result<Self> {
        if squares.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("squared weights must be finite and nonnegative".into()));
        }
        let total: f64 = squares.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("squared weights sum to zero".into()));
        }
        Ok(Self {
            diag: squares.iter().map(|w| (w / total).sqrt()).collect(),
        })
    }

    pub fn uniform(dim: usize) -> Self {
        Self {
            diag: vec![(1.0 / dim as f64).sqrt(); dim],
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.diag
    }

    pub fn squares(&self) -> Vec<f64> {
        self.diag.iter().map(|d| d * d).collect()
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Entrywise pseudoinverse: zeros stay zero.
    pub fn pinv(&self) -> Vec<f64> {
        self.diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect()
    }

    /// Positions `j` with `d_jj^2 <= threshold`.
    pub fn light_indices(&self, threshold: f64) -> Vec<usize> {
        self.diag
            .iter()
            .enumerate()
            .filter(|(_, d)| *d * *d <= threshold)
            .map(|(j, _)| j)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizeOptions {
    /// Mirror-descent iterations per solve.
    pub emd_budget: usize,
    pub step_mode: StepMode,
    /// Report infeasibility instead of rescaling when the best objective
    /// value exceeds this.
    pub eta_cap: Option<f64>,
}

impl Default for FactorizeOptions {
    fn default() -> Self {
        Self {
            emd_budget: 5000,
            step_mode: StepMode::Adaptive,
            eta_cap: None,
        }
    }
}

impl FactorizeOptions {
    pub fn with_budget(emd_budget: usize) -> Self {
        Self {
            emd_budget,
            ..Self::default()
        }
    }
}

/// Certified two-sided estimate of an NP-hard norm.
///
/// `alpha_lo` is attained by `lower_witness`; `alpha_hi` is the spectral norm
/// of the factor in `best_fact`.
#[derive(Clone, Debug, Serialize)]
pub struct Bracket<F> {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub best_fact: F,
    pub lower_witness: Vec<i8>,
    pub converged: bool,
    pub bisection_steps: usize,
}

impl<F> Bracket<F> {
    pub fn ratio(&self) -> f64 {
        if self.alpha_lo == 0.0 {
            if self.alpha_hi == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.alpha_hi / self.alpha_lo
        }
    }
}

/// Best sign vector found so far for a lower bound.
pub(crate) struct Probe<S: Fn(&[i8]) -> f64> {
    pub value: f64,
    pub witness: Vec<i8>,
    score: S,
}

impl<S: Fn(&[i8]) -> f64> Probe<S> {
    pub fn new(dim: usize, score: S) -> Self {
        let witness = vec![1; dim];
        let value = score(&witness);
        Self { value, witness, score }
    }

    /// Keeps `x` (after hill climbing) if it beats the current witness.
    pub fn offer(&mut self, x: Vec<i8>) {
        let v = (self.score)(&x);
        if v > self.value {
            let mut x = x;
            self.value = local_ascent(&mut x, &self.score);
            self.witness = x;
        }
    }
}

/// Result of one factorization attempt at a trial `alpha`.
pub(crate) struct Attempt<F> {
    pub fact: F,
    pub eta: f64,
    pub alpha_effective: f64,
    pub t_norm: f64,
}

const MAX_BISECTION_STEPS: usize = 64;

/// Bisection on `alpha` between the probe lower bound and `hi_seed`.
///
/// Stops once `alpha_hi / alpha_lo <= constant * (1 + rel_tol)` or when the
/// search interval shrinks below a factor `1 + rel_tol / 16`.
pub(crate) fn bisect<F, S, Solve>(
    hi_seed: f64,
    constant: f64,
    rel_tol: f64,
    probe: &mut Probe<S>,
    mut solve: Solve,
) -> Result<Bracket<F>>
where
    S: Fn(&[i8]) -> f64,
    Solve: FnMut(f64, &mut Probe<S>) -> Result<Attempt<F>>,
{
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    let mut best = solve(hi_seed, probe)?;
    let mut hi = hi_seed.min(best.t_norm);
    let mut lo = probe.value;
    let mut steps = 0;
    let mut converged = false;
    loop {
        if best.t_norm <= constant * (1.0 + rel_tol) * probe.value {
            converged = true;
            break;
        }
        if hi <= lo * (1.0 + rel_tol / 16.0) || steps >= MAX_BISECTION_STEPS {
            break;
        }
        let mid = (lo * hi).sqrt();
        let attempt = solve(mid, probe)?;
        steps += 1;
        let feasible = attempt.eta <= 0.0 || attempt.alpha_effective <= mid * (1.0 + rel_tol);
        if feasible {
            hi = mid.min(attempt.t_norm);
        } else {
            lo = mid;
        }
        if attempt.t_norm < best.t_norm {
            best = attempt;
        }
        hi = hi.min(best.t_norm);
        lo = lo.max(probe.value).min(hi);
    }
    Ok(Bracket {
        alpha_lo: probe.value,
        alpha_hi: best.t_norm,
        best_fact: best.fact,
        lower_witness: probe.witness.clone(),
        converged,
        bisection_steps: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((K_P - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-15);
        let kg = std::f64::consts::PI / (2.0 * (1.0 + 2f64.sqrt()).ln());
        assert!((K_G_UPPER - kg).abs() < 1e-15);
        assert!(K_G_UPPER <= 1.783);
    }

    #[test]
    fn weights_have_unit_trace() {
        let d = DiagonalWeights::from_squares(&[1.0, 2.0, 1.0]).unwrap();
        let total: f64 = d.squares().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(d.light_indices(0.3), vec![0, 2]);
        assert!(DiagonalWeights::from_squares(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn pinv_keeps_zeros() {
        let d = DiagonalWeights::from_squares(&[0.0, 1.0]).unwrap();
        assert_eq!(d.pinv(), vec![0.0, 1.0]);
    }
}
