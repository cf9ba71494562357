//! Symmetric Grothendieck factorization `G = D T D` from the block program
//!
//! ```text
//! minimize  lambda_max [[-alpha F, G], [G, -alpha F]]   over F = diag(f), f in the simplex.
//! ```
//!
//! The block matrix is orthogonally congruent to
//! `diag(G - alpha F, -G - alpha F)`, so its top eigenvalue is the larger of
//! the two `s x s` branch eigenvalues and only those are ever formed.
//!
//! A positive value `eta` is repaired by adding `eta I` to both diagonal
//! blocks: with `F~ = (alpha F + eta I) / (alpha + eta s)` the block program
//! at `alpha + eta s` is nonpositive, giving `||T|| <= alpha + eta s`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::emd::{emd_minimize, EmdConfig, SimplexPoint, SubgradientSample};
use crate::error::{Error, Result};
use crate::factor::{
    bisect, Attempt, Bracket, DiagonalWeights, FactorizeOptions, Probe, EPS_DIAG, ETA_MARGIN,
    K_G_UPPER, ZERO_COLUMN_REL,
};
use crate::matcore::{
    frobenius_norm, inf1_at, sign_vector, spectral_norm, top_pair, DenseMatrix, EIG_TOL,
};

#[derive(Clone, Debug, Serialize)]
pub struct GrothendieckFactorization {
    pub d: DiagonalWeights,
    #[serde(skip)]
    pub t: DenseMatrix,
    pub alpha: f64,
    /// Proven upper bound on `||T||`.
    pub alpha_effective: f64,
    pub t_norm: f64,
    pub eta: f64,
    pub rescaled: bool,
    pub emd_iterations: usize,
    /// `||G - D T D||_F`.
    pub reconstruction_residual: f64,
}

/// Which diagonal block of the congruent form attains the top eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

pub struct GrothendieckProblem<'a> {
    g: &'a DenseMatrix,
}

impl<'a> GrothendieckProblem<'a> {
    pub fn new(g: &'a DenseMatrix) -> Result<Self> {
        g.ensure_symmetric()?;
        Ok(Self { g })
    }

    pub fn dim(&self) -> usize {
        self.g.ncols()
    }

    fn branch(&self, sign: f64, alpha: f64, f: &SimplexPoint) -> DMatrix<f64> {
        let mut m = self.g.as_dmatrix() * sign;
        for (j, w) in f.weights().iter().enumerate() {
            m[(j, j)] -= alpha * w;
        }
        m
    }

    /// Objective value, subgradient `-alpha |w|^2`, the branch eigenvector `w`,
    /// and which branch attained the maximum.
    fn evaluate(
        &self,
        alpha: f64,
        f: &SimplexPoint,
    ) -> Result<(SubgradientSample, DVector<f64>, Branch)> {
        if f.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "simplex point has dimension {}, matrix has {} columns",
                f.dim(),
                self.dim()
            )));
        }
        let (vp, wp) = top_pair(&self.branch(1.0, alpha, f))?;
        let (vn, wn) = top_pair(&self.branch(-1.0, alpha, f))?;
        let (value, w, branch) = if vp >= vn {
            (vp, wp, Branch::Positive)
        } else {
            (vn, wn, Branch::Negative)
        };
        let subgradient = w.iter().map(|x| -alpha * x * x).collect();
        Ok((SubgradientSample { value, subgradient }, w, branch))
    }

    pub fn objective(&self, alpha: f64, f: &SimplexPoint) -> Result<SubgradientSample> {
        self.evaluate(alpha, f).map(|(s, _, _)| s)
    }

    fn solve(
        &self,
        alpha: f64,
        opts: &FactorizeOptions,
        mut on_vector: impl FnMut(&DVector<f64>),
    ) -> Result<GrothendieckFactorization> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        let s = self.dim();
        if s == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        let margin = ETA_MARGIN * self.g.as_dmatrix().norm().max(1.0);
        let config = EmdConfig::new(opts.emd_budget, opts.step_mode).stop_below(margin);
        let run = emd_minimize(
            |f| {
                let (sample, w, _) = self.evaluate(alpha, f)?;
                on_vector(&w);
                Ok(sample)
            },
            s,
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

    /// `D = diag(f)^(1/2)`, `T = D^+ G D^+`.
    fn exact(&self, alpha: f64, f: &[f64], eta: f64) -> Result<GrothendieckFactorization> {
        let fro = frobenius_norm(self.g);
        let mut squares = f.to_vec();
        for (j, w) in squares.iter_mut().enumerate() {
            if *w <= EPS_DIAG {
                let norm = self.g.column_norm(j);
                if norm > ZERO_COLUMN_REL * fro {
                    return Err(Error::ZeroWeightColumn { index: j, norm });
                }
                *w = 0.0;
            }
        }
        let d = DiagonalWeights::from_squares(&squares)?;
        self.assemble(d, alpha, alpha, eta, false)
    }

    /// `F~ = (alpha F + eta I) / (alpha + eta s)`, `T = D^-1 G D^-1`.
    fn rescaled(&self, alpha: f64, f: &[f64], eta: f64, eta_used: f64) -> Result<GrothendieckFactorization> {
        let s = self.dim() as f64;
        let total = alpha + eta_used * s;
        let squares: Vec<f64> = f.iter().map(|w| (alpha * w + eta_used) / total).collect();
        let d = DiagonalWeights::from_squares(&squares)?;
        self.assemble(d, alpha, total, eta, true)
    }

    fn assemble(
        &self,
        d: DiagonalWeights,
        alpha: f64,
        alpha_effective: f64,
        eta: f64,
        rescaled: bool,
    ) -> Result<GrothendieckFactorization> {
        let s = self.dim();
        let inv = d.pinv();
        let dd = d.entries();
        let g = self.g.as_dmatrix();
        let t = DMatrix::from_fn(s, s, |i, j| inv[i] * g[(i, j)] * inv[j]);
        let dtd = DMatrix::from_fn(s, s, |i, j| dd[i] * t[(i, j)] * dd[j]);
        let reconstruction_residual = (g - dtd).norm();
        let t = DenseMatrix::from_dmatrix(t)?;
        let t_norm = spectral_norm(&t, EIG_TOL)?;
        Ok(GrothendieckFactorization {
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

    fn verify(&self, fact: &GrothendieckFactorization) -> Result<()> {
        let trace: f64 = fact.d.squares().iter().sum();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::InvariantViolated(format!("trace(D^2) = {trace}")));
        }
        let fro = frobenius_norm(self.g);
        if fact.reconstruction_residual > 1e-8 * fro.max(1.0) {
            return Err(Error::InvariantViolated(format!(
                "||G - DTD||_F = {:e}",
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

/// Top eigenvalue of the block matrix through the two branch problems.
pub fn groth_objective(g: &DenseMatrix, alpha: f64, f: &SimplexPoint) -> Result<SubgradientSample> {
    GrothendieckProblem::new(g)?.objective(alpha, f)
}

/// Same as [`groth_objective`], also reporting the attaining branch.
pub fn groth_objective_branch(
    g: &DenseMatrix,
    alpha: f64,
    f: &SimplexPoint,
) -> Result<(SubgradientSample, Branch)> {
    GrothendieckProblem::new(g)?
        .evaluate(alpha, f)
        .map(|(s, _, b)| (s, b))
}

/// Factorizes a symmetric `G = D T D` aiming for `||T|| <= alpha`.
pub fn groth_factorize(
    g: &DenseMatrix,
    alpha: f64,
    opts: &FactorizeOptions,
) -> Result<GrothendieckFactorization> {
    GrothendieckProblem::new(g)?.solve(alpha, opts, |_| {})
}

/// Certified bracket around `||G||_{inf->1}` for symmetric `G`.
pub fn groth_optimal_alpha(
    g: &DenseMatrix,
    rel_tol: f64,
    opts: &FactorizeOptions,
) -> Result<Bracket<GrothendieckFactorization>> {
    let problem = GrothendieckProblem::new(g)?;
    let s = g.ncols();
    if s == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if g.is_zero() {
        return Ok(Bracket {
            alpha_lo: 0.0,
            alpha_hi: 0.0,
            best_fact: GrothendieckFactorization {
                d: DiagonalWeights::uniform(s),
                t: DenseMatrix::zeros(s, s),
                alpha: 0.0,
                alpha_effective: 0.0,
                t_norm: 0.0,
                eta: 0.0,
                rescaled: false,
                emd_iterations: 0,
                reconstruction_residual: 0.0,
            },
            lower_witness: vec![1; s],
            converged: true,
            bisection_steps: 0,
        });
    }
    let mut probe = Probe::new(s, |x: &[i8]| inf1_at(g, x));
    let (_, up) = top_pair(g.as_dmatrix())?;
    probe.offer(sign_vector(up.as_slice()));
    let (_, un) = top_pair(&(-g.as_dmatrix()))?;
    probe.offer(sign_vector(un.as_slice()));

    let hi_seed = s as f64 * spectral_norm(g, EIG_TOL)? * K_G_UPPER;
    bisect(hi_seed, K_G_UPPER, rel_tol, &mut probe, |alpha, probe| {
        let mut signs = Vec::new();
        let fact = problem.solve(alpha, opts, |w| signs.push(sign_vector(w.as_slice())))?;
        for x in signs {
            probe.offer(x);
        }
        let (_, vp) = top_pair(fact.t.as_dmatrix())?;
        probe.offer(sign_vector(vp.as_slice()));
        let (_, vn) = top_pair(&(-fact.t.as_dmatrix()))?;
        probe.offer(sign_vector(vn.as_slice()));
        Ok(Attempt {
            eta: fact.eta,
            alpha_effective: fact.alpha_effective,
            t_norm: fact.t_norm,
            fact,
        })
    })
}
