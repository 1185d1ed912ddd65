//! Optimistic reinforcement learning for periodic Markov decision processes.
//!
//! A periodic MDP is turned into a stationary one by pairing each state with
//! its phase ([`model`]). Learners ([`learners`]) keep visit statistics over
//! that augmented model, build confidence sets around the estimates and plan
//! optimistically with an aperiodic extended value iteration ([`planner`]).
//! [`envs`] simulates ground-truth models and [`analysis`] turns logged runs
//! into regret curves.

// `!(x >= 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod envs;
pub mod error;
pub mod learners;
pub mod model;
pub mod planner;

pub use error::{AgentError, ModelError, PlanError, RunError};
pub use learners::{Agent, AgentConfig, AlgorithmKind};
pub use model::{augment, phase_of, validate_pmdp, Amdp, PmdpSpec, Policy, Shape};
