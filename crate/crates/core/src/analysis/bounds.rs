use serde::{Deserialize, Serialize};

use crate::error::RunError;
use crate::model::Amdp;

/// Default constant of the second regret bound.
pub const DEFAULT_BETA: f64 = 34.0;

/// Inputs shared by both regret bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub d_aug: f64,
    pub states: usize,
    pub period: usize,
    pub actions: usize,
    pub horizon: f64,
    pub delta: f64,
}

impl BoundInputs {
    pub fn new(d_aug: f64, states: usize, period: usize, actions: usize, horizon: f64, delta: f64) -> Self {
        Self {
            d_aug,
            states,
            period,
            actions,
            horizon,
            delta,
        }
    }

    fn check(&self) -> Result<(), RunError> {
        if !(self.d_aug.is_finite() && self.d_aug > 0.0) {
            return Err(RunError::InvalidInput(format!("diameter {} must be finite and positive", self.d_aug)));
        }
        if self.states == 0 || self.period == 0 || self.actions == 0 {
            return Err(RunError::InvalidInput("S, N and A must be positive".into()));
        }
        if !(self.horizon >= 2.0 && self.horizon.is_finite()) {
            return Err(RunError::InvalidInput(format!("horizon {} must be at least 2", self.horizon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(RunError::InvalidInput(format!("delta {} outside (0, 1)", self.delta)));
        }
        Ok(())
    }

    fn log_t_delta(&self) -> f64 {
        (self.horizon / self.delta).ln()
    }
}

/// `34 D S N sqrt(A T log(T / delta))`.
pub fn theorem1_bound(inputs: BoundInputs) -> Result<f64, RunError> {
    inputs.check()?;
    let BoundInputs {
        d_aug,
        states,
        period,
        actions,
        horizon,
        ..
    } = inputs;
    Ok(34.0 * d_aug * (states * period) as f64 * (actions as f64 * horizon * inputs.log_t_delta()).sqrt())
}

/// The two terms of the second regret bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2 {
    /// `beta D S sqrt(N A T log(T / delta))`, or with `S^2 N A` under the
    /// root replaced by the total support size.
    pub delta1: f64,
    /// `D S^2 N A log(T / delta) log(T)`.
    pub delta2: f64,
}

impl Theorem2 {
    pub fn total(&self) -> f64 {
        self.delta1 + self.delta2
    }
}

/// Second regret bound. `gamma_sum`, when given, replaces `S^2 N A` under
/// the root of the first term.
pub fn theorem2_bound(inputs: BoundInputs, beta: f64, gamma_sum: Option<f64>) -> Result<Theorem2, RunError> {
    inputs.check()?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(RunError::InvalidInput(format!("beta {beta} must be positive")));
    }
    let BoundInputs {
        d_aug,
        states,
        period,
        actions,
        horizon,
        ..
    } = inputs;
    let (s, n, a) = (states as f64, period as f64, actions as f64);
    let log = inputs.log_t_delta();
    let mass = match gamma_sum {
        Some(g) if g > 0.0 && g.is_finite() => g,
        Some(g) => return Err(RunError::InvalidInput(format!("support total {g} must be positive"))),
        None => s * s * n * a,
    };
    Ok(Theorem2 {
        delta1: beta * d_aug * (mass * horizon * log).sqrt(),
        delta2: d_aug * s * s * n * a * log * horizon.ln(),
    })
}

/// Total number of nonzero transition probabilities over all pairs.
pub fn gamma_sum(model: &Amdp) -> f64 {
    model.support_sizes().iter().sum::<usize>() as f64
}

/// Both bounds with their inputs echoed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub beta: f64,
    pub theorem1: f64,
    pub theorem2: Theorem2,
    /// Second bound with the support total under the root, if known.
    pub theorem2_gamma: Option<Theorem2>,
}

impl BoundReport {
    pub fn new(inputs: BoundInputs, beta: f64, gamma: Option<f64>) -> Result<Self, RunError> {
        Ok(Self {
            inputs,
            beta,
            theorem1: theorem1_bound(inputs)?,
            theorem2: theorem2_bound(inputs, beta, None)?,
            theorem2_gamma: gamma.map(|g| theorem2_bound(inputs, beta, Some(g))).transpose()?,
        })
    }
}
