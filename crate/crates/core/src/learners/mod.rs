//! Online optimistic learners and their statistics.

mod agent;
mod candidates;
mod confidence;
mod config;
mod stats;

pub use agent::{Agent, AgentSnapshot, EpisodeRecord};
pub use candidates::{select_period, CandidateTracker, ScoreMode};
pub use confidence::{bernstein_radius, hoeffding_reward_radius, l1_transition_radius, pucrl2_confidence, pucrlb_confidence};
pub use config::{AgentConfig, AlgorithmKind, EpsilonSchedule};
pub use stats::CountStats;
