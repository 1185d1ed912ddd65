//! Confidence sets built from visit statistics.

use super::stats::CountStats;
use crate::planner::{BoxSet, ConfidenceSet, L1Set};

/// Uncapped L1 radius of an empirical transition row (Weissman bound over
/// `S * N` successor events, as used by the periodic UCRL2 variant).
pub fn l1_transition_radius(states: usize, period: usize, actions: usize, delta: f64, t_k: u64, n: u64) -> f64 {
    let log = (2.0 * actions as f64 * t_k as f64 / delta).ln();
    (14.0 * (states * period) as f64 * log / n.max(1) as f64).sqrt()
}

/// Hoeffding radius of an empirical mean reward.
pub fn hoeffding_reward_radius(states: usize, actions: usize, delta: f64, t_k: u64, n: u64) -> f64 {
    let log = (2.0 * (states * actions) as f64 * t_k as f64 / delta).ln();
    (7.0 * log / (2.0 * n.max(1) as f64)).sqrt()
}

/// Empirical Bernstein radius for a quantity with empirical standard
/// deviation `sigma` after `n` samples.
pub fn bernstein_radius(sigma: f64, states: usize, period: usize, actions: usize, delta: f64, n: u64) -> f64 {
    let n = n.max(1) as f64;
    let log = (6.0 * (states * period * actions) as f64 * n / delta).ln();
    2.0 * sigma * (log / n).sqrt() + 6.0 * log / n
}

/// L1-ball set around the episode-start estimates.
///
/// Pairs never visited get the uniform row with radius 2, which makes the
/// whole simplex feasible.
pub fn pucrl2_confidence(stats: &CountStats, delta: f64, t_k: u64) -> ConfidenceSet {
    let shape = stats.shape();
    let (ns, na, np) = (shape.states, shape.actions, shape.period);
    let pairs = shape.pairs();
    let mut center = Vec::with_capacity(pairs * ns);
    let mut radius = Vec::with_capacity(pairs);
    let mut reward_lo = Vec::with_capacity(pairs);
    let mut reward_hi = Vec::with_capacity(pairs);
    for pair in 0..pairs {
        let raw = stats.raw_episode_count(pair);
        let n = stats.episode_count(pair);
        center.extend(stats.empirical_row(pair));
        radius.push(if raw == 0 {
            2.0
        } else {
            l1_transition_radius(ns, np, na, delta, t_k, n).min(2.0)
        });
        let r_hat = stats.mean_reward(pair);
        let beta_r = hoeffding_reward_radius(ns, na, delta, t_k, n);
        reward_lo.push((r_hat - beta_r).clamp(0.0, 1.0));
        reward_hi.push((r_hat + beta_r).clamp(0.0, 1.0));
    }
    ConfidenceSet::L1(
        L1Set::new(shape, center, radius, reward_lo, reward_hi).expect("estimates form a valid L1 set"),
    )
}

/// Element-wise empirical Bernstein set around the episode-start estimates.
///
/// Pairs never visited get full `[0, 1]` boxes.
pub fn pucrlb_confidence(stats: &CountStats, delta: f64) -> ConfidenceSet {
    let shape = stats.shape();
    let (ns, na, np) = (shape.states, shape.actions, shape.period);
    let pairs = shape.pairs();
    let mut lo = Vec::with_capacity(pairs * ns);
    let mut hi = Vec::with_capacity(pairs * ns);
    let mut reward_lo = Vec::with_capacity(pairs);
    let mut reward_hi = Vec::with_capacity(pairs);
    for pair in 0..pairs {
        let raw = stats.raw_episode_count(pair);
        let n = stats.episode_count(pair);
        if raw == 0 {
            lo.extend(std::iter::repeat_n(0.0, ns));
            hi.extend(std::iter::repeat_n(1.0, ns));
        } else {
            for p_hat in stats.empirical_row(pair) {
                let sigma = (p_hat * (1.0 - p_hat)).max(0.0).sqrt();
                let beta = bernstein_radius(sigma, ns, np, na, delta, n);
                lo.push((p_hat - beta).clamp(0.0, 1.0));
                hi.push((p_hat + beta).clamp(0.0, 1.0));
            }
        }
        let r_hat = stats.mean_reward(pair);
        let beta_r = bernstein_radius(stats.reward_variance(pair).sqrt(), ns, np, na, delta, n);
        reward_lo.push((r_hat - beta_r).clamp(0.0, 1.0));
        reward_hi.push((r_hat + beta_r).clamp(0.0, 1.0));
    }
    ConfidenceSet::Box(BoxSet::new(shape, lo, hi, reward_lo, reward_hi).expect("estimates lie inside their boxes"))
}
