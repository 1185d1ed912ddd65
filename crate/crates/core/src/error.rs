use thiserror::Error;

/// Errors raised while building or validating models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("transition row (phase {phase}, state {state}, action {action}) sums to {sum}")]
    RowSum {
        phase: usize,
        state: usize,
        action: usize,
        sum: f64,
    },
    #[error("transition row (phase {phase}, state {state}, action {action}) has an invalid entry for next state {next}")]
    NegativeProbability {
        phase: usize,
        state: usize,
        action: usize,
        next: usize,
    },
    #[error("reward (phase {phase}, state {state}, action {action}) = {value} is outside [0, 1]")]
    RewardRange {
        phase: usize,
        state: usize,
        action: usize,
        value: f64,
    },
    #[error("period must be at least 2, got {0}")]
    PeriodTooShort(usize),
    #[error("state and action counts must be positive")]
    EmptyDimension,
    #[error("{what}: expected {expected} entries, got {got}")]
    Dimensions {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("action {action} at augmented state {state} is out of range")]
    ActionRange { state: usize, action: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Errors raised by the planners.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("empty confidence box: lower bounds sum to {lo_sum}, upper bounds to {hi_sum}")]
    EmptySet { lo_sum: f64, hi_sum: f64 },
    #[error("invalid planner input: {0}")]
    InvalidInput(String),
    #[error("value iteration did not converge in {iterations} iterations (last span {span:e})")]
    NotConverged {
        iterations: usize,
        span: f64,
        /// Midpoint gain estimate at the last iteration.
        last_gain: f64,
    },
}

/// Errors raised by learning agents.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    Config(String),
    #[error("observed state {state} is out of range (S = {states})")]
    StateRange { state: usize, states: usize },
    #[error("reward {0} is outside [0, 1]")]
    RewardRange(f64),
    #[error("absorb called without a preceding action")]
    NoPendingAction,
    #[error("snapshot does not match this agent: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Errors raised by the simulator and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
