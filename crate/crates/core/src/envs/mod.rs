//! Benchmark environments and the seeded interaction loop.

mod generate;
mod sim;

pub use generate::{random_pmdp, sawtooth_beta, sawtooth_env, sawtooth_reward};
pub use sim::{simulate, simulate_with, Environment, LogMeta, RewardNoise, Step, TrajectoryLog};
