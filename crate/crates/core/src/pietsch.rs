//! Pietsch factorization `B = T D` from the eigenvalue program
//!
//! ```text
//! minimize  lambda_max(B^T B - alpha^2 diag(f))   over f in the simplex,
//! ```
//!
//! whose value is nonpositive exactly when some `D` with `trace(D^2) = 1`
//! admits `B = T D` with `||T|| <= alpha`. An inexact solution with value
//! `eta > 0` is repaired by mixing in the uniform weights, which yields a
//! factor with `||T|| <= sqrt(alpha^2 + eta s)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::emd::{emd_minimize, EmdConfig, SimplexPoint, SubgradientSample};
use crate::error::{Error, Result};
use crate::factor::{
    bisect, Attempt, Bracket, DiagonalWeights, FactorizeOptions, Probe, EPS_DIAG, ETA_MARGIN, K_P,
    ZERO_COLUMN_REL,
};
use crate::matcore::{
    frobenius_norm, inf2_at, sign_vector, spectral_norm, top_pair, DenseMatrix, EIG_TOL,
};

#[derive(Clone, Debug, Serialize)]
pub struct PietschFactorization {
    pub d: DiagonalWeights,
    #[serde(skip)]
    pub t: DenseMatrix,
    /// The `alpha` the program was solved at.
    pub alpha: f64,
    /// Proven upper bound on `||T||`.
    pub alpha_effective: f64,
    /// Computed `||T||`.
    pub t_norm: f64,
    /// Best objective value reached by the solver.
    pub eta: f64,
    /// Whether the inexact-solution rescaling was applied.
    pub rescaled: bool,
    pub emd_iterations: usize,
    /// `||B - T D||_F`.
    pub reconstruction_residual: f64,
}

/// `B` together with its Gram matrix, formed once per solve.
pub struct PietschProblem<'a> {
    b: &'a DenseMatrix,
    gram: DMatrix<f64>,
}

impl<'a> PietschProblem<'a> {
    pub fn new(b: &'a DenseMatrix) -> Self {
        Self {
            b,
            gram: b.gram().into_dmatrix(),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.ncols()
    }

    /// Objective value, subgradient `-alpha^2 |u|^2`, and the top eigenvector `u`.
    fn evaluate(&self, alpha: f64, f: &SimplexPoint) -> Result<(SubgradientSample, DVector<f64>)> {
        if f.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "simplex point has dimension {}, matrix has {} columns",
                f.dim(),
                self.dim()
            )));
        }
        let a2 = alpha * alpha;
        let mut m = self.gram.clone();
        for (j, w) in f.weights().iter().enumerate() {
            m[(j, j)] -= a2 * w;
        }
        let (value, u) = top_pair(&m)?;
        let subgradient = u.iter().map(|x| -a2 * x * x).collect();
        Ok((SubgradientSample { value, subgradient }, u))
    }

    pub fn objective(&self, alpha: f64, f: &SimplexPoint) -> Result<SubgradientSample> {
        self.evaluate(alpha, f).map(|(s, _)| s)
    }

    fn solve(
        &self,
        alpha: f64,
        opts: &FactorizeOptions,
        mut on_vector: impl FnMut(&DVector<f64>),
    ) -> Result<PietschFactorization> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if self.b.is_zero() {
            return Err(Error::ZeroMatrix);
        }
        let margin = ETA_MARGIN * self.gram.norm().max(1.0);
        let config = EmdConfig::new(opts.emd_budget, opts.step_mode).stop_below(margin);
        let run = emd_minimize(
            |f| {
                let (sample, u) = self.evaluate(alpha, f)?;
                on_vector(&u);
                Ok(sample)
            },
            self.dim(),
            &config,
        )?;
        let eta = run.best_value;
        if let Some(cap) = opts.eta_cap {
            if eta > cap {
                return Err(Error::Infeasible { eta, cap });
            }
        }
        let f = run.best_point.weights();
        let mut fact = if eta <= 0.0 {
            let exact = self.exact(alpha, f, eta)?;
            if exact.t_norm <= alpha * (1.0 + 1e-8) {
                exact
            } else {
                self.rescaled(alpha, f, eta, margin)?
            }
        } else {
            self.rescaled(alpha, f, eta, eta + margin)?
        };
        fact.emd_iterations = run.iterations;
        self.verify(&fact)?;
        Ok(fact)
    }

    /// `D = diag(f)^(1/2)`, `T = B D^+`.
    fn exact(&self, alpha: f64, f: &[f64], eta: f64) -> Result<PietschFactorization> {
        let fro = frobenius_norm(self.b);
        let mut squares = f.to_vec();
        for (j, w) in squares.iter_mut().enumerate() {
            if *w <= EPS_DIAG {
                let norm = self.b.column_norm(j);
                if norm > ZERO_COLUMN_REL * fro {
                    return Err(Error::ZeroWeightColumn { index: j, norm });
                }
                *w = 0.0;
            }
        }
        let d = DiagonalWeights::from_squares(&squares)?;
        self.assemble(d, alpha, alpha, eta, false)
    }

    /// `F~ = (alpha^2 F + eta I) / (alpha^2 + eta s)`, `T = B D^-1`.
    fn rescaled(&self, alpha: f64, f: &[f64], eta: f64, eta_used: f64) -> Result<PietschFactorization> {
        let a2 = alpha * alpha;
        let s = self.dim() as f64;
        let total = a2 + eta_used * s;
        let squares: Vec<f64> = f.iter().map(|w| (a2 * w + eta_used) / total).collect();
        let d = DiagonalWeights::from_squares(&squares)?;
        self.assemble(d, alpha, total.sqrt(), eta, true)
    }

    fn assemble(
        &self,
        d: DiagonalWeights,
        alpha: f64,
        alpha_effective: f64,
        eta: f64,
        rescaled: bool,
    ) -> Result<PietschFactorization> {
        let mut t = self.b.as_dmatrix().clone();
        for (j, inv) in d.pinv().into_iter().enumerate() {
            t.column_mut(j).scale_mut(inv);
        }
        let mut td = t.clone();
        for (j, &dj) in d.entries().iter().enumerate() {
            td.column_mut(j).scale_mut(dj);
        }
        let reconstruction_residual = (self.b.as_dmatrix() - td).norm();
        let t = DenseMatrix::from_dmatrix(t)?;
        let t_norm = spectral_norm(&t, EIG_TOL)?;
        Ok(PietschFactorization {
            d,
            t,
            alpha,
            alpha_effective,
            t_norm,
            eta,
            rescaled,
            emd_iterations: 0,
            reconstruction_residual,
        })
    }

    fn verify(&self, fact: &PietschFactorization) -> Result<()> {
        let trace: f64 = fact.d.squares().iter().sum();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::InvariantViolated(format!("trace(D^2) = {trace}")));
        }
        let fro = frobenius_norm(self.b);
        if fact.reconstruction_residual > 1e-8 * fro.max(1.0) {
            return Err(Error::InvariantViolated(format!(
                "||B - TD||_F = {:e}",
                fact.reconstruction_residual
            )));
        }
        if fact.t_norm > fact.alpha_effective * (1.0 + 1e-8) {
            return Err(Error::InvariantViolated(format!(
                "||T|| = {} exceeds alpha_effective = {}",
                fact.t_norm, fact.alpha_effective
            )));
        }
        Ok(())
    }
}

/// `lambda_max(B^T B - alpha^2 diag(f))` with the subgradient `-alpha^2 |u|^2`.
pub fn pietsch_objective(b: &DenseMatrix, alpha: f64, f: &SimplexPoint) -> Result<SubgradientSample> {
    PietschProblem::new(b).objective(alpha, f)
}

/// Factorizes `B = T D` aiming for `||T|| <= alpha`.
///
/// When the solver stalls at a positive value `eta`, the rescaled factor with
/// `alpha_effective = sqrt(alpha^2 + eta s)` is returned unless
/// `opts.eta_cap` is exceeded.
pub fn pietsch_factorize(b: &DenseMatrix, alpha: f64, opts: &FactorizeOptions) -> Result<PietschFactorization> {
    PietschProblem::new(b).solve(alpha, opts, |_| {})
}

/// Certified bracket `[alpha_lo, alpha_hi]` around `||B||_{inf->2}`.
///
/// The lower end is `||B x||_2` for the best sign vector probed (signs of the
/// eigenvectors met during the solves, improved by single flips); the upper
/// end is the norm of the best factor found by bisecting on `alpha`.
pub fn pietsch_optimal_alpha(
    b: &DenseMatrix,
    rel_tol: f64,
    opts: &FactorizeOptions,
) -> Result<Bracket<PietschFactorization>> {
    if b.is_zero() || b.ncols() == 0 {
        return Err(Error::ZeroMatrix);
    }
    let problem = PietschProblem::new(b);
    let s = b.ncols();
    let mut probe = Probe::new(s, |x: &[i8]| inf2_at(b, x));
    let (_, top) = top_pair(&problem.gram)?;
    probe.offer(sign_vector(top.as_slice()));

    let hi_seed = (s as f64).sqrt() * spectral_norm(b, EIG_TOL)? * K_P;
    bisect(hi_seed, K_P, rel_tol, &mut probe, |alpha, probe| {
        let mut signs = Vec::new();
        let fact = problem.solve(alpha, opts, |u| signs.push(sign_vector(u.as_slice())))?;
        for x in signs {
            probe.offer(x);
        }
        // Signs of the top right singular vector of T probe B through D.
        let (_, v) = top_pair(&fact.t.gram().into_dmatrix())?;
        probe.offer(sign_vector(v.as_slice()));
        Ok(Attempt {
            eta: fact.eta,
            alpha_effective: fact.alpha_effective,
            t_norm: fact.t_norm,
            fact,
        })
    })
}
