//! Regret curves, regret bounds and run aggregation.

mod bounds;
mod regret;

pub use bounds::{gamma_sum, theorem1_bound, theorem2_bound, BoundInputs, BoundReport, Theorem2, DEFAULT_BETA};
pub use regret::{
    aggregate, regret_curve, regret_curve_with, spec_hash, variation_budget, Aggregate, GainCache, RegretCurve,
    RegretMode,
};
