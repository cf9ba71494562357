//! Entropic mirror descent over the probability simplex.
//!
//! Each step reweights the current point by `exp(-beta * theta)` and
//! renormalizes. Weights are kept as logarithms shifted so their maximum is
//! zero, which avoids underflow when `beta * theta` grows large.

use serde::Serialize;

use crate::error::{Error, Result};

/// Point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    pub fn uniform(dim: usize) -> Self {
        assert!(dim >= 1, "simplex dimension must be positive");
        Self {
            weights: vec![1.0 / dim as f64; dim],
        }
    }

    /// Normalizes nonnegative weights to unit sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("simplex point needs at least one weight".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("simplex weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("simplex weights sum to zero".into()));
        }
        Ok(Self {
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Objective value and one subgradient at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgradientSample {
    pub value: f64,
    pub subgradient: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMode {
    /// `beta = sqrt(2 log s / (T ||theta||_inf^2))` with `T` the horizon.
    FixedHorizon,
    /// Same with the current iteration count `t` in place of `T`.
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Budget,
    BelowTarget,
    Stationary,
}

#[derive(Clone, Debug)]
pub struct EmdConfig {
    pub iterations: usize,
    pub step_mode: StepMode,
    /// Stop as soon as the best value is at or below this.
    pub stop_below: Option<f64>,
    pub record_trace: bool,
}

impl EmdConfig {
    pub fn new(iterations: usize, step_mode: StepMode) -> Self {
        Self {
            iterations,
            step_mode,
            stop_below: None,
            record_trace: false,
        }
    }

    pub fn stop_below(mut self, target: f64) -> Self {
        self.stop_below = Some(target);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmdRun {
    /// Number of objective evaluations performed.
    pub iterations: usize,
    pub step_mode: StepMode,
    pub best_value: f64,
    pub best_point: SimplexPoint,
    pub stop_reason: StopReason,
    pub trace: Option<Vec<f64>>,
}

/// Minimizes a convex function over the `dim`-dimensional simplex, starting
/// at the uniform point and returning the best iterate seen.
pub fn emd_minimize<F>(mut objective: F, dim: usize, config: &EmdConfig) -> Result<EmdRun>
where
    F: FnMut(&SimplexPoint) -> Result<SubgradientSample>,
{
    if dim == 0 {
        return Err(Error::InvalidArgument("simplex dimension must be positive".into()));
    }
    if config.iterations == 0 {
        return Err(Error::InvalidArgument("iteration budget must be positive".into()));
    }
    let horizon = config.iterations;
    let log_dim = (dim as f64).ln();

    let mut point = SimplexPoint::uniform(dim);
    let mut log_w = vec![0.0; dim];
    let mut best_value = f64::INFINITY;
    let mut best_point = point.clone();
    let mut trace = config.record_trace.then(Vec::new);
    let mut stop_reason = StopReason::Budget;
    let mut evaluations = 0;

    for t in 1..=horizon {
        let sample = objective(&point)?;
        evaluations = t;
        if !sample.value.is_finite() || sample.subgradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteObjective { iteration: t });
        }
        if sample.subgradient.len() != dim {
            return Err(Error::Shape(format!(
                "subgradient has length {}, expected {dim}",
                sample.subgradient.len()
            )));
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(sample.value);
        }
        if sample.value < best_value {
            best_value = sample.value;
            best_point = point.clone();
        }
        if config.stop_below.is_some_and(|target| best_value <= target) {
            stop_reason = StopReason::BelowTarget;
            break;
        }
        let theta_inf = sample.subgradient.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        if theta_inf == 0.0 {
            stop_reason = StopReason::Stationary;
            break;
        }
        if t == horizon {
            break;
        }
        let steps = match config.step_mode {
            StepMode::FixedHorizon => horizon,
            StepMode::Adaptive => t,
        } as f64;
        let beta = (2.0 * log_dim / (steps * theta_inf * theta_inf)).sqrt();
        point = reweight(&mut log_w, &sample.subgradient, beta);
    }

    Ok(EmdRun {
        iterations: evaluations,
        step_mode: config.step_mode,
        best_value,
        best_point,
        stop_reason,
        trace,
    })
}

/// One multiplicative update `f_j <- f_j exp(-beta theta_j) / sum`.
pub fn mirror_step(point: &SimplexPoint, theta: &[f64], beta: f64) -> SimplexPoint {
    assert_eq!(point.dim(), theta.len(), "subgradient length mismatch");
    let mut log_w: Vec<f64> = point
        .weights
        .iter()
        .map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY })
        .collect();
    reweight(&mut log_w, theta, beta)
}

fn reweight(log_w: &mut [f64], theta: &[f64], beta: f64) -> SimplexPoint {
    for (lw, g) in log_w.iter_mut().zip(theta) {
        *lw -= beta * g;
    }
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for lw in log_w.iter_mut() {
        *lw -= max;
    }
    let unnorm: Vec<f64> = log_w.iter().map(|lw| lw.exp()).collect();
    let total: f64 = unnorm.iter().sum();
    SimplexPoint {
        weights: unnorm.into_iter().map(|w| w / total).collect(),
    }
}
