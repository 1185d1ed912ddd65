//! Optimistic and exact planning on augmented models.

mod confidence;
mod diameter;
mod evi;
mod exact;
mod inner;

pub use confidence::{BoxSet, ConfidenceSet, L1Set, SetKind};
pub use diameter::{diameter, hitting_times};
pub use evi::{modified_evi, value_iteration, EviOptions, GainEstimate, PlanResult, DEFAULT_MAX_ITER, DEFAULT_TAU};
pub use exact::{
    decode_policy, enumerate_optimal, induced_chain, optimal_avg_reward, policy_avg_reward, Chain, PolicyGain,
    MAX_ENUMERATED_POLICIES,
};
pub use inner::{descending_order, inner_max_box, inner_max_l1};
