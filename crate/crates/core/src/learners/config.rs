use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::candidates::ScoreMode;
use crate::envs::RewardNoise;
use crate::error::AgentError;
use crate::planner::{SetKind, DEFAULT_MAX_ITER, DEFAULT_TAU};

/// The learning algorithms provided by [`crate::learners::Agent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmKind {
    /// Stationary UCRL2: no phase augmentation.
    Ucrl2,
    /// Known period, L1 confidence sets.
    Pucrl2,
    /// Known period, empirical Bernstein boxes.
    Pucrlb,
    /// Candidate periods, L1 confidence sets.
    UPucrl2,
    /// Candidate periods, empirical Bernstein boxes.
    UPucrlb,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::Pucrlb,
        AlgorithmKind::UPucrlb,
        AlgorithmKind::Pucrl2,
        AlgorithmKind::UPucrl2,
        AlgorithmKind::Ucrl2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Ucrl2 => "ucrl2",
            AlgorithmKind::Pucrl2 => "pucrl2",
            AlgorithmKind::Pucrlb => "pucrlb",
            AlgorithmKind::UPucrl2 => "u-pucrl2",
            AlgorithmKind::UPucrlb => "u-pucrlb",
        }
    }

    pub fn set_kind(self) -> SetKind {
        match self {
            AlgorithmKind::Ucrl2 | AlgorithmKind::Pucrl2 | AlgorithmKind::UPucrl2 => SetKind::L1,
            AlgorithmKind::Pucrlb | AlgorithmKind::UPucrlb => SetKind::Box,
        }
    }

    pub fn unknown_period(self) -> bool {
        matches!(self, AlgorithmKind::UPucrl2 | AlgorithmKind::UPucrlb)
    }

    pub fn default_schedule(self) -> EpsilonSchedule {
        match self.set_kind() {
            SetKind::L1 => EpsilonSchedule::InvSqrt,
            SetKind::Box => EpsilonSchedule::Inv,
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        Ok(match norm.as_str() {
            "ucrl2" => AlgorithmKind::Ucrl2,
            "pucrl2" => AlgorithmKind::Pucrl2,
            "pucrlb" => AlgorithmKind::Pucrlb,
            "upucrl2" => AlgorithmKind::UPucrl2,
            "upucrlb" => AlgorithmKind::UPucrlb,
            _ => return Err(AgentError::Config(format!("unknown algorithm `{s}`"))),
        })
    }
}

/// Planning tolerance as a function of the episode start time `t_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EpsilonSchedule {
    /// `1 / sqrt(t_k)`
    InvSqrt,
    /// `1 / t_k`
    Inv,
}

impl EpsilonSchedule {
    pub fn at(self, t_k: u64) -> f64 {
        match self {
            EpsilonSchedule::InvSqrt => 1.0 / (t_k as f64).sqrt(),
            EpsilonSchedule::Inv => 1.0 / t_k as f64,
        }
    }
}

impl FromStr for EpsilonSchedule {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inv_sqrt" | "1/sqrt(t)" => Ok(EpsilonSchedule::InvSqrt),
            "inv" | "1/t" => Ok(EpsilonSchedule::Inv),
            _ => Err(AgentError::Config(format!("unknown epsilon schedule `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub kind: AlgorithmKind,
    /// Confidence parameter in `(0, 1)`.
    pub delta: f64,
    /// The known period, or the candidate periods for unknown-period kinds.
    pub periods: Vec<usize>,
    pub tau: f64,
    pub noise: RewardNoise,
    pub epsilon: EpsilonSchedule,
    pub score: ScoreMode,
    pub evi_max_iter: usize,
    /// Iteration cap of the per-candidate value iteration.
    pub score_max_iter: usize,
}

impl AgentConfig {
    /// Configuration with the defaults for `kind`.
    ///
    /// `periods` is the known period for the known-period kinds (ignored by
    /// the stationary baseline, which always uses 1) and the candidate set
    /// otherwise.
    pub fn new(kind: AlgorithmKind, periods: Vec<usize>) -> Self {
        let periods = if kind == AlgorithmKind::Ucrl2 { vec![1] } else { periods };
        Self {
            kind,
            delta: 0.05,
            periods,
            tau: DEFAULT_TAU,
            noise: RewardNoise::Bernoulli,
            epsilon: kind.default_schedule(),
            score: ScoreMode::Cumulative,
            evi_max_iter: DEFAULT_MAX_ITER,
            score_max_iter: 20_000,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_noise(mut self, noise: RewardNoise) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(AgentError::Config(format!("delta {} outside (0, 1)", self.delta)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(AgentError::Config(format!("tau {} outside (0, 1)", self.tau)));
        }
        if self.periods.is_empty() {
            return Err(AgentError::Config("period set is empty".into()));
        }
        match self.kind {
            AlgorithmKind::Ucrl2 => {
                if self.periods != [1] {
                    return Err(AgentError::Config("the stationary baseline uses period 1".into()));
                }
            }
            AlgorithmKind::Pucrl2 | AlgorithmKind::Pucrlb => {
                if self.periods.len() != 1 || self.periods[0] < 2 {
                    return Err(AgentError::Config("known-period algorithms need one period >= 2".into()));
                }
            }
            AlgorithmKind::UPucrl2 | AlgorithmKind::UPucrlb => {
                if self.periods.iter().any(|&n| n < 2) {
                    return Err(AgentError::Config("candidate periods must all be >= 2".into()));
                }
                let mut sorted = self.periods.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != self.periods.len() {
                    return Err(AgentError::Config("candidate periods must be distinct".into()));
                }
            }
        }
        if self.evi_max_iter == 0 || self.score_max_iter == 0 {
            return Err(AgentError::Config("iteration caps must be positive".into()));
        }
        Ok(())
    }
}
