use serde::{Deserialize, Serialize};

use super::stats::CountStats;
use crate::error::PlanError;
use crate::model::{phase_of, Shape};
use crate::planner::{value_iteration, EviOptions};

/// How candidate scores combine across episodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoreMode {
    /// Running sum of per-episode gain estimates.
    Cumulative,
    /// Only the latest episode's gain estimate.
    Latest,
}

/// Per-candidate-period statistics for learning with an unknown period.
///
/// Every candidate files each observation under its own phase clock
/// `((t - 1) mod N_i) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTracker {
    periods: Vec<usize>,
    stats: Vec<CountStats>,
    scores: Vec<f64>,
    selected: usize,
}

impl CandidateTracker {
    pub fn new(states: usize, actions: usize, periods: &[usize]) -> Self {
        assert!(!periods.is_empty(), "candidate set must be nonempty");
        Self {
            periods: periods.to_vec(),
            stats: periods
                .iter()
                .map(|&n| CountStats::new(Shape::new(states, actions, n)))
                .collect(),
            scores: vec![0.0; periods.len()],
            selected: 0,
        }
    }

    pub fn periods(&self) -> &[usize] {
        &self.periods
    }

    pub fn stats(&self, index: usize) -> &CountStats {
        &self.stats[index]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn selected(&self) -> usize {
        self.selected
    }

    pub fn selected_period(&self) -> usize {
        self.periods[self.selected]
    }

    pub fn selected_stats(&self) -> &CountStats {
        &self.stats[self.selected]
    }

    /// Files the observation made at global time `t` with every candidate.
    pub fn update_all(&mut self, t: u64, state: usize, action: usize, reward: f64, next_state: usize) {
        for (stats, &period) in self.stats.iter_mut().zip(&self.periods) {
            let x = stats.shape().aug_index(state, phase_of(t, period) - 1);
            stats.record(x, action, reward, next_state);
        }
    }

    pub fn start_episode(&mut self) {
        self.stats.iter_mut().for_each(CountStats::start_episode);
    }

    /// Estimates each candidate's gain by value iteration on its point model
    /// and folds it into the scores.
    ///
    /// A point model whose optimal gain is not constant across states never
    /// meets the span test; the midpoint estimate at the iteration cap is
    /// used in that case.
    pub fn score_all(&mut self, opts: EviOptions, mode: ScoreMode) -> Result<(), PlanError> {
        for (stats, score) in self.stats.iter().zip(self.scores.iter_mut()) {
            let gain = match value_iteration(&stats.point_model(), opts) {
                Ok(est) => est.gain,
                Err(PlanError::NotConverged { last_gain, .. }) => last_gain,
                Err(e) => return Err(e),
            };
            match mode {
                ScoreMode::Cumulative => *score += gain,
                ScoreMode::Latest => *score = gain,
            }
        }
        Ok(())
    }

    /// Selects the best-scoring candidate and returns its index.
    pub fn select(&mut self) -> usize {
        self.selected = select_period(&self.scores, &self.periods);
        self.selected
    }
}

/// Index of the highest score; ties go to the smallest period.
pub fn select_period(scores: &[f64], periods: &[usize]) -> usize {
    assert_eq!(scores.len(), periods.len());
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] || (scores[i] == scores[best] && periods[i] < periods[best]) {
            best = i;
        }
    }
    best
}
