//! Monte Carlo checks of the norm of a random column submatrix.
//!
//! Two sampling models are compared. `PDelta` keeps exactly `floor(delta n)`
//! coordinates chosen uniformly. `RDelta` keeps each coordinate independently
//! with probability `delta`. Norms are evaluated with the exact sign oracles.
//!
//! Trial `t` of a run seeded with `seed` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `2t` for the `RDelta` sample and
//! `2t + 1` for the `PDelta` sample, so results do not depend on evaluation
//! order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    column_submatrix, frobenius_norm, hollow_gram, norm_inf1_exact_capped, norm_inf2_exact_capped,
    principal_submatrix, stable_rank, ColumnSubset, DenseMatrix,
};

/// Largest column count the experiments accept.
pub const EXPERIMENT_CAP: usize = 20;

/// Fewest trials for a meaningful standard error.
pub const MIN_TRIALS: usize = 100;

/// Width of the Monte Carlo cushion, in standard errors.
pub const CUSHION: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Model {
    #[serde(rename = "P_delta")]
    PDelta,
    #[serde(rename = "R_delta")]
    RDelta,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub trials: usize,
    pub empirical_mean: f64,
    pub theoretical_bound: f64,
    pub std_error: f64,
    pub pass: bool,
    pub model: Model,
    pub delta: f64,
}

impl ExperimentResult {
    fn new(stats: &Stats, bound: f64, std_error: f64, model: Model, delta: f64) -> Self {
        Self {
            trials: stats.count,
            empirical_mean: stats.mean,
            theoretical_bound: bound,
            std_error,
            pass: stats.mean <= bound + CUSHION * std_error,
            model,
            delta,
        }
    }
}

/// Results of [`check_inf2_reduction`].
#[derive(Clone, Debug, Serialize)]
pub struct Inf2Reduction {
    /// `E ||A R_delta||_{inf->2}` against `sqrt(2 delta (1 - delta)) ||A||_F + delta ||A||_{inf->2}`.
    pub independent: ExperimentResult,
    /// `E ||A P_delta||_{inf->2}` against twice the independent-model mean.
    pub fixed_size: ExperimentResult,
    /// `E ||A P_delta||_{inf->2}` against `7 sqrt(s)`; present only for
    /// standardized input with `s <= ceil(2 st.rank(A))`.
    pub small_sample: Option<ExperimentResult>,
    pub s: usize,
    pub full_norm: f64,
}

/// Results of [`check_inf1_reduction`].
#[derive(Clone, Debug, Serialize)]
pub struct Inf1Reduction {
    /// `E ||P_delta H P_delta||_{inf->1}` against `s / 9`; present only
    /// inside the caller's regime.
    pub small_sample: Option<ExperimentResult>,
    /// `E ||P_delta H P_delta||_{inf->1}` against twice the independent-model mean.
    pub fixed_size: ExperimentResult,
    pub independent_mean: f64,
    pub independent_std_error: f64,
    /// `delta^2 ||H||_{inf->1} + delta^{3/2} (||H||_col + ||H^T||_col)` for the
    /// hollow Gram matrix `H`.
    pub rhs_without_constant: f64,
    /// Independent-model mean divided by `rhs_without_constant`.
    pub fitted_constant: Option<f64>,
    pub s: usize,
    pub in_regime: bool,
}

/// Draws a coordinate subset under `model`.
pub fn sample_projector<R: Rng + ?Sized>(
    model: Model,
    n: usize,
    delta: f64,
    rng: &mut R,
) -> Result<ColumnSubset> {
    check_delta(delta)?;
    match model {
        Model::PDelta => {
            let s = fixed_size(n, delta);
            let picked = rand::seq::index::sample(rng, n, s).into_vec();
            ColumnSubset::from_unsorted(picked, n)
        }
        Model::RDelta => {
            let kept = (0..n).filter(|_| rng.random_bool(delta)).collect();
            ColumnSubset::new(kept, n)
        }
    }
}

/// Estimates `||A S||_{inf->2}` for random coordinate projectors `S`.
pub fn check_inf2_reduction(a: &DenseMatrix, delta: f64, trials: usize, seed: u64) -> Result<Inf2Reduction> {
    check_inputs(a.ncols(), delta, trials)?;
    let n = a.ncols();
    let s = fixed_size(n, delta);
    let (full_norm, _) = norm_inf2_exact_capped(a, EXPERIMENT_CAP)?;
    let norm_of = |tau: &ColumnSubset| -> Result<f64> {
        Ok(norm_inf2_exact_capped(&column_submatrix(a, tau)?, EXPERIMENT_CAP)?.0)
    };
    let (r, p) = run_trials(n, delta, trials, seed, norm_of)?;

    let bound = (2.0 * delta * (1.0 - delta)).sqrt() * frobenius_norm(a) + delta * full_norm;
    let independent = ExperimentResult::new(&r, bound, r.std_error(), Model::RDelta, delta);
    let fixed = poissonization(&p, &r, delta);

    let small_sample = if a.ensure_standardized().is_ok() && s as f64 <= (2.0 * stable_rank(a)?).ceil() {
        Some(ExperimentResult::new(&p, 7.0 * (s as f64).sqrt(), p.std_error(), Model::PDelta, delta))
    } else {
        None
    };

    Ok(Inf2Reduction {
        independent,
        fixed_size: fixed,
        small_sample,
        s,
        full_norm,
    })
}

/// Estimates `||S H S||_{inf->1}` for the hollow Gram matrix `H` of a
/// standardized `A`. With `regime = Some(c)`, the `s / 9` bound is checked
/// when `s <= ceil(c st.rank(A))`.
pub fn check_inf1_reduction(
    a: &DenseMatrix,
    delta: f64,
    trials: usize,
    seed: u64,
    regime: Option<f64>,
) -> Result<Inf1Reduction> {
    check_inputs(a.ncols(), delta, trials)?;
    if let Some(c) = regime {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!("regime constant must be positive, got {c}")));
        }
    }
    let h = hollow_gram(a)?;
    let n = a.ncols();
    let s = fixed_size(n, delta);
    let norm_of = |tau: &ColumnSubset| -> Result<f64> {
        Ok(norm_inf1_exact_capped(&principal_submatrix(&h, tau)?, EXPERIMENT_CAP)?.0)
    };
    let (r, p) = run_trials(n, delta, trials, seed, norm_of)?;

    let (full, _) = norm_inf1_exact_capped(&h, EXPERIMENT_CAP)?;
    let rhs = delta * delta * full + delta.powf(1.5) * 2.0 * column_norm_sum(&h);
    let fitted_constant = (rhs > 0.0).then(|| r.mean / rhs);

    let st_rank = stable_rank(a)?;
    let in_regime = regime.is_some_and(|c| s as f64 <= (c * st_rank).ceil());
    let small_sample =
        in_regime.then(|| ExperimentResult::new(&p, s as f64 / 9.0, p.std_error(), Model::PDelta, delta));

    Ok(Inf1Reduction {
        small_sample,
        fixed_size: poissonization(&p, &r, delta),
        independent_mean: r.mean,
        independent_std_error: r.std_error(),
        rhs_without_constant: rhs,
        fitted_constant,
        s,
        in_regime,
    })
}

/// `floor(delta n)`, robust to rounding just below an integer.
fn fixed_size(n: usize, delta: f64) -> usize {
    ((delta * n as f64 + 1e-9).floor() as usize).min(n)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!("delta must lie in [0, 1], got {delta}")));
    }
    Ok(())
}

fn check_inputs(n: usize, delta: f64, trials: usize) -> Result<()> {
    check_delta(delta)?;
    if n > EXPERIMENT_CAP {
        return Err(Error::EnumerationCap {
            cols: n,
            cap: EXPERIMENT_CAP,
        });
    }
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

fn column_norm_sum(h: &DenseMatrix) -> f64 {
    h.column_norms().iter().sum()
}

fn poissonization(p: &Stats, r: &Stats, delta: f64) -> ExperimentResult {
    let combined = (p.std_error().powi(2) + 4.0 * r.std_error().powi(2)).sqrt();
    ExperimentResult::new(p, 2.0 * r.mean, combined, Model::PDelta, delta)
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn run_trials<F>(n: usize, delta: f64, trials: usize, seed: u64, norm_of: F) -> Result<(Stats, Stats)>
where
    F: Fn(&ColumnSubset) -> Result<f64> + Sync,
{
    let samples: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let r = sample_projector(Model::RDelta, n, delta, &mut trial_rng(seed, 2 * t))?;
            let p = sample_projector(Model::PDelta, n, delta, &mut trial_rng(seed, 2 * t + 1))?;
            Ok((norm_of(&r)?, norm_of(&p)?))
        })
        .collect::<Result<_>>()?;
    let mut r = Stats::default();
    let mut p = Stats::default();
    for (x, y) in samples {
        r.push(x);
        p.push(y);
    }
    Ok((r, p))
}

/// Running mean and variance.
#[derive(Clone, Debug, Default)]
struct Stats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Stats {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}
