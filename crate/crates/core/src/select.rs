//! Randomized column selection.
//!
//! Both selectors double a sample size `s = 4, 8, 16, ..., n`. For each `s`
//! they make up to `ceil(8 log2 s)` attempts: draw a uniform `s`-subset,
//! factor it, keep the columns whose squared weight is at most `2/s`, and
//! accept the result if it passes the metric check (`||A_tau|| <= 15` for
//! the norm selector, `kappa(A_tau) <= sqrt 3` for the conditioning one).
//! The search stops after a round without an accepted candidate.

use std::collections::HashMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{FactorizeOptions, K_P};
use crate::grothendieck::groth_factorize;
use crate::matcore::{
    column_submatrix, condition_number, hollow_gram, spectral_norm, stable_rank, ColumnSubset,
    DenseMatrix, COND_TOL, EIG_TOL,
};
use crate::pietsch::pietsch_factorize;

#[derive(Clone, Debug, Serialize)]
pub struct SelectConfig {
    pub emd_iterations: usize,
    /// Acceptance bound on `||A_tau||` for [`kt_select`].
    pub kt_norm: f64,
    /// Acceptance bound on `kappa(A_tau)` for [`bt_select`].
    pub bt_kappa: f64,
    /// Treat factorizations whose objective stays above this as failed draws.
    pub eta_cap: Option<f64>,
    /// Return every column at once when `||A||` already meets `kt_norm`.
    pub shortcut: bool,
    pub threads: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            emd_iterations: 5000,
            kt_norm: 15.0,
            bt_kappa: 3f64.sqrt(),
            eta_cap: None,
            shortcut: false,
            threads: 1,
        }
    }
}

impl SelectConfig {
    fn factorize_options(&self) -> FactorizeOptions {
        FactorizeOptions {
            eta_cap: self.eta_cap,
            ..FactorizeOptions::with_budget(self.emd_iterations)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.emd_iterations == 0 || self.threads == 0 {
            return Err(Error::InvalidArgument("iteration and thread counts must be positive".into()));
        }
        if !(self.kt_norm > 0.0 && self.bt_kappa > 0.0) {
            return Err(Error::InvalidArgument("thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one reduction step.
#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    pub sigma: ColumnSubset,
    /// `None` when the factorization failed.
    pub tau: Option<ColumnSubset>,
    pub alpha: f64,
    pub alpha_effective: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundEntry {
    pub s: usize,
    pub attempt: usize,
    pub candidate_size: Option<usize>,
    /// `||A_tau||` or `kappa(A_tau)`; `None` for failed draws, infinite
    /// condition numbers serialize as `null`.
    pub metric: Option<f64>,
    pub alpha_effective: Option<f64>,
    pub accepted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Kt,
    Bt,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectionReport {
    pub selector: Selector,
    pub tau: ColumnSubset,
    pub accepted_metric: f64,
    /// Number of reduction attempts made.
    pub attempts: usize,
    pub per_round_log: Vec<RoundEntry>,
    pub seed: u64,
    pub stable_rank: f64,
    /// `|tau| / st.rank(A)`.
    pub cardinality_ratio: f64,
    pub shortcut_taken: bool,
}

/// Uniformly random `s`-subset of `0..n`, sorted.
pub fn random_subset<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Result<ColumnSubset> {
    if s > n {
        return Err(Error::InvalidArgument(format!("cannot draw {s} of {n} columns")));
    }
    let picked = rand::seq::index::sample(rng, n, s).into_vec();
    ColumnSubset::from_unsorted(picked, n)
}

/// Sample sizes `4, 8, 16, ...` capped at `n`; just `[n]` when `n < 4`.
pub fn doubling_schedule(n: usize) -> Vec<usize> {
    if n < 4 {
        return vec![n];
    }
    let mut out = Vec::new();
    let mut s = 4;
    loop {
        out.push(s.min(n));
        if s >= n {
            break;
        }
        s *= 2;
    }
    out
}

/// `ceil(8 log2 s)`.
pub fn inner_attempts(s: usize) -> usize {
    if s <= 1 {
        return 0;
    }
    (8.0 * (s as f64).log2() - 1e-9).ceil() as usize
}

/// Draws `sigma`, factors `A_sigma = T D` with `alpha = 8 K_P sqrt(s)`, and
/// keeps the columns with `d_jj^2 <= 2/s`.
pub fn norm_reduce<R: Rng + ?Sized>(
    a: &DenseMatrix,
    s: usize,
    rng: &mut R,
    config: &SelectConfig,
) -> Result<Reduction> {
    let sigma = random_subset(a.ncols(), s, rng)?;
    norm_reduce_on(a, sigma, config)
}

fn norm_reduce_on(a: &DenseMatrix, sigma: ColumnSubset, config: &SelectConfig) -> Result<Reduction> {
    let s = sigma.len();
    let alpha = 8.0 * K_P * (s as f64).sqrt();
    let b = column_submatrix(a, &sigma)?;
    match pietsch_factorize(&b, alpha, &config.factorize_options()) {
        Ok(fact) => {
            let local = ColumnSubset::new(fact.d.light_indices(2.0 / s as f64), s)?;
            Ok(Reduction {
                tau: Some(sigma.compose(&local)?),
                sigma,
                alpha,
                alpha_effective: Some(fact.alpha_effective),
                eta: Some(fact.eta),
            })
        }
        Err(e) if e.is_solver_failure() => Ok(Reduction {
            sigma,
            tau: None,
            alpha,
            alpha_effective: None,
            eta: None,
        }),
        Err(e) => Err(e),
    }
}

/// Draws `sigma`, factors the hollow Gram matrix `G = D T D` with
/// `alpha = s/4`, and keeps the columns with `d_jj^2 <= 2/s`.
pub fn cond_reduce<R: Rng + ?Sized>(
    a: &DenseMatrix,
    s: usize,
    rng: &mut R,
    config: &SelectConfig,
) -> Result<Reduction> {
    let sigma = random_subset(a.ncols(), s, rng)?;
    cond_reduce_on(a, sigma, config)
}

fn cond_reduce_on(a: &DenseMatrix, sigma: ColumnSubset, config: &SelectConfig) -> Result<Reduction> {
    let s = sigma.len();
    let alpha = s as f64 / 4.0;
    let g = hollow_gram(&column_submatrix(a, &sigma)?)?;
    match groth_factorize(&g, alpha, &config.factorize_options()) {
        Ok(fact) => {
            let local = ColumnSubset::new(fact.d.light_indices(2.0 / s as f64), s)?;
            Ok(Reduction {
                tau: Some(sigma.compose(&local)?),
                sigma,
                alpha,
                alpha_effective: Some(fact.alpha_effective),
                eta: Some(fact.eta),
            })
        }
        Err(e) if e.is_solver_failure() => Ok(Reduction {
            sigma,
            tau: None,
            alpha,
            alpha_effective: None,
            eta: None,
        }),
        Err(e) => Err(e),
    }
}

/// Column subset with `||A_tau|| <= config.kt_norm`, large with good probability.
pub fn kt_select(a: &DenseMatrix, seed: u64, config: &SelectConfig) -> Result<SelectionReport> {
    run(a, seed, config, Selector::Kt)
}

/// Column subset with `kappa(A_tau) <= config.bt_kappa`, large with good probability.
pub fn bt_select(a: &DenseMatrix, seed: u64, config: &SelectConfig) -> Result<SelectionReport> {
    run(a, seed, config, Selector::Bt)
}

struct Evaluated {
    reduction: Reduction,
    metric: Option<f64>,
    accepted: bool,
}

fn run(a: &DenseMatrix, seed: u64, config: &SelectConfig, selector: Selector) -> Result<SelectionReport> {
    config.validate()?;
    let n = a.ncols();
    if n == 0 {
        return Err(Error::InvalidArgument("matrix has no columns".into()));
    }
    a.ensure_standardized()?;
    let st_rank = stable_rank(a)?;
    let threshold = match selector {
        Selector::Kt => config.kt_norm,
        Selector::Bt => config.bt_kappa,
    };
    let metric_of = |tau: &ColumnSubset| -> Result<f64> {
        let sub = column_submatrix(a, tau)?;
        Ok(match selector {
            Selector::Kt => spectral_norm(&sub, EIG_TOL)?,
            Selector::Bt => condition_number(&sub, COND_TOL),
        })
    };

    let finish = |tau: ColumnSubset, metric: f64, attempts, log, shortcut| SelectionReport {
        selector,
        cardinality_ratio: tau.len() as f64 / st_rank,
        tau,
        accepted_metric: metric,
        attempts,
        per_round_log: log,
        seed,
        stable_rank: st_rank,
        shortcut_taken: shortcut,
    };

    if config.shortcut && selector == Selector::Kt {
        let full_norm = spectral_norm(a, EIG_TOL)?;
        if full_norm <= config.kt_norm {
            return Ok(finish(ColumnSubset::full(n), full_norm, 0, Vec::new(), true));
        }
    }

    let pool = if config.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let first = ColumnSubset::new(vec![0], n)?;
    let first_metric = metric_of(&first)?;
    let mut best = (first, first_metric);
    let mut attempts = 0;
    let mut log = Vec::new();

    for s in doubling_schedule(n) {
        let k_max = inner_attempts(s);
        let seeds: Vec<u64> = (0..k_max).map(|_| master.next_u64()).collect();
        let sigmas: Vec<ColumnSubset> = seeds
            .iter()
            .map(|&sd| random_subset(n, s, &mut ChaCha8Rng::seed_from_u64(sd)))
            .collect::<Result<_>>()?;

        let evaluate = |sigma: &ColumnSubset| -> Result<Evaluated> {
            let reduction = match selector {
                Selector::Kt => norm_reduce_on(a, sigma.clone(), config)?,
                Selector::Bt => cond_reduce_on(a, sigma.clone(), config)?,
            };
            let metric = reduction.tau.as_ref().map(&metric_of).transpose()?;
            let accepted = metric.is_some_and(|m| m <= threshold);
            Ok(Evaluated {
                reduction,
                metric,
                accepted,
            })
        };

        // Identical draws give identical outcomes, so each distinct sigma is
        // factored once per round.
        let outcomes: Vec<Evaluated> = match &pool {
            Some(pool) => {
                let mut unique: Vec<&ColumnSubset> = Vec::new();
                for sg in &sigmas {
                    if !unique.contains(&sg) {
                        unique.push(sg);
                    }
                }
                let done: Vec<Evaluated> =
                    pool.install(|| unique.par_iter().map(|sg| evaluate(sg)).collect::<Result<_>>())?;
                let by_sigma: HashMap<&ColumnSubset, &Evaluated> =
                    unique.iter().copied().zip(done.iter()).collect();
                let mut out = Vec::new();
                for sg in &sigmas {
                    let e = by_sigma[sg];
                    out.push(Evaluated {
                        reduction: e.reduction.clone(),
                        metric: e.metric,
                        accepted: e.accepted,
                    });
                    if e.accepted {
                        break;
                    }
                }
                out
            }
            None => {
                let mut cache: HashMap<ColumnSubset, Evaluated> = HashMap::new();
                let mut out = Vec::new();
                for sg in &sigmas {
                    if !cache.contains_key(sg) {
                        let e = evaluate(sg)?;
                        cache.insert(sg.clone(), e);
                    }
                    let e = &cache[sg];
                    out.push(Evaluated {
                        reduction: e.reduction.clone(),
                        metric: e.metric,
                        accepted: e.accepted,
                    });
                    if e.accepted {
                        break;
                    }
                }
                out
            }
        };

        let mut accepted_this_round = false;
        for (k, e) in outcomes.into_iter().enumerate() {
            attempts += 1;
            log.push(RoundEntry {
                s,
                attempt: k + 1,
                candidate_size: e.reduction.tau.as_ref().map(ColumnSubset::len),
                metric: e.metric,
                alpha_effective: e.reduction.alpha_effective,
                accepted: e.accepted,
            });
            if e.accepted {
                let tau = e.reduction.tau.expect("accepted candidates exist");
                // The last round may be capped below a doubling, so its
                // candidate can be smaller than the one already held.
                if tau.len() >= best.0.len() {
                    best = (tau, e.metric.expect("accepted candidates are measured"));
                }
                accepted_this_round = true;
            }
        }
        if !accepted_this_round {
            break;
        }
    }

    Ok(finish(best.0, best.1, attempts, log, false))
}
