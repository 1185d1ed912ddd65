use serde::{Deserialize, Serialize};

use crate::model::{Amdp, Shape};

/// Visit statistics of one learner over its own augmented state space.
///
/// All tables are indexed by augmented pair `x * A + a`; transition counts by
/// `[pair][s']`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    shape: Shape,
    visits: Vec<u64>,
    transitions: Vec<u64>,
    reward_sum: Vec<f64>,
    reward_sq_sum: Vec<f64>,
    /// Running mean and sum of squared deviations, for a variance free of
    /// cancellation.
    welford: Vec<(f64, f64)>,
    /// Visits during the current episode (`v_k`).
    in_episode: Vec<u64>,
    /// Raw visit counts frozen at the start of the current episode.
    at_episode_start: Vec<u64>,
}

impl CountStats {
    pub fn new(shape: Shape) -> Self {
        let pairs = shape.pairs();
        Self {
            shape,
            visits: vec![0; pairs],
            transitions: vec![0; pairs * shape.states],
            reward_sum: vec![0.0; pairs],
            reward_sq_sum: vec![0.0; pairs],
            welford: vec![(0.0, 0.0); pairs],
            in_episode: vec![0; pairs],
            at_episode_start: vec![0; pairs],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Files one transition of augmented state `x` under action `a`.
    pub fn record(&mut self, x: usize, a: usize, reward: f64, next_state: usize) {
        let pair = self.shape.pair(x, a);
        self.visits[pair] += 1;
        self.in_episode[pair] += 1;
        self.transitions[pair * self.shape.states + next_state] += 1;
        self.reward_sum[pair] += reward;
        self.reward_sq_sum[pair] += reward * reward;
        let (mean, m2) = &mut self.welford[pair];
        let d = reward - *mean;
        *mean += d / self.visits[pair] as f64;
        *m2 += d * (reward - *mean);
    }

    /// Freezes the episode-start counts and clears the in-episode counters.
    pub fn start_episode(&mut self) {
        self.at_episode_start.copy_from_slice(&self.visits);
        self.in_episode.iter_mut().for_each(|v| *v = 0);
    }

    /// Raw visit count of a pair so far.
    pub fn visits(&self, pair: usize) -> u64 {
        self.visits[pair]
    }

    /// Raw count at the start of the episode, before the `max{1, .}` floor.
    pub fn raw_episode_count(&self, pair: usize) -> u64 {
        self.at_episode_start[pair]
    }

    /// `n_k = max{1, count at episode start}`.
    pub fn episode_count(&self, pair: usize) -> u64 {
        self.at_episode_start[pair].max(1)
    }

    pub fn in_episode(&self, pair: usize) -> u64 {
        self.in_episode[pair]
    }

    /// Whether the next visit to `pair` would break the doubling criterion.
    pub fn doubling_reached(&self, pair: usize) -> bool {
        self.in_episode[pair] >= self.episode_count(pair)
    }

    pub fn total_visits(&self) -> u64 {
        self.visits.iter().sum()
    }

    pub fn transition_counts(&self, pair: usize) -> &[u64] {
        &self.transitions[pair * self.shape.states..(pair + 1) * self.shape.states]
    }

    /// Empirical successor distribution from episode-start data; uniform for
    /// a pair never visited.
    ///
    /// Statistics are only read at episode starts, where current and frozen
    /// counts coincide.
    pub fn empirical_row(&self, pair: usize) -> Vec<f64> {
        let n = self.visits[pair];
        let ns = self.shape.states;
        if n == 0 {
            return vec![1.0 / ns as f64; ns];
        }
        self.transition_counts(pair)
            .iter()
            .map(|&c| c as f64 / n as f64)
            .collect()
    }

    /// `sum of rewards / max{1, n}`.
    pub fn mean_reward(&self, pair: usize) -> f64 {
        self.reward_sum[pair] / self.visits[pair].max(1) as f64
    }

    /// Population variance of observed rewards, clamped at zero.
    pub fn reward_variance(&self, pair: usize) -> f64 {
        (self.welford[pair].1 / self.visits[pair].max(1) as f64).max(0.0)
    }

    pub fn reward_sums(&self, pair: usize) -> (f64, f64) {
        (self.reward_sum[pair], self.reward_sq_sum[pair])
    }

    /// Point estimate of the augmented model.
    pub fn point_model(&self) -> Amdp {
        let pairs = self.shape.pairs();
        let rewards = (0..pairs).map(|p| self.mean_reward(p).clamp(0.0, 1.0)).collect();
        let rows = (0..pairs).flat_map(|p| self.empirical_row(p)).collect();
        Amdp::from_tables(self.shape, rewards, rows).expect("empirical rows are distributions")
    }
}
