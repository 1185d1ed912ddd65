use serde::{Deserialize, Serialize};

use super::candidates::CandidateTracker;
use super::confidence::{pucrl2_confidence, pucrlb_confidence};
use super::config::AgentConfig;
use crate::error::AgentError;
use crate::model::phase_of;
use crate::planner::{modified_evi, ConfidenceSet, EviOptions, PlanResult, SetKind};

/// Summary of one planning episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based episode index `k`.
    pub index: u64,
    /// Episode start time `t_k`.
    pub start: u64,
    /// Period the episode planned with.
    pub period: usize,
    /// Optimistic gain of the episode plan.
    pub gain: f64,
    pub iterations: usize,
}

/// Optimistic learner for periodic MDPs.
///
/// The agent alternates [`Agent::act`] and [`Agent::absorb`]. A new episode
/// is planned lazily on the first `act` after the doubling criterion fires.
/// Known-period kinds run with a single candidate, so every kind shares the
/// same bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    config: AgentConfig,
    states: usize,
    actions: usize,
    tracker: CandidateTracker,
    /// Time of the next action.
    t: u64,
    plan: Option<PlanResult>,
    confidence: Option<ConfidenceSet>,
    replan: bool,
    pending: Option<(usize, usize)>,
    history: Vec<EpisodeRecord>,
}

/// Serializable state of an [`Agent`], for checkpoint and resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub config: AgentConfig,
    pub states: usize,
    pub actions: usize,
    pub tracker: CandidateTracker,
    pub t: u64,
    pub plan: Option<PlanResult>,
    pub confidence: Option<ConfidenceSet>,
    pub replan: bool,
    pub pending: Option<(usize, usize)>,
    pub history: Vec<EpisodeRecord>,
}

impl Agent {
    pub fn new(config: AgentConfig, states: usize, actions: usize) -> Result<Self, AgentError> {
        config.validate()?;
        if states == 0 || actions == 0 {
            return Err(AgentError::Config("state and action counts must be positive".into()));
        }
        let tracker = CandidateTracker::new(states, actions, &config.periods);
        Ok(Self {
            config,
            states,
            actions,
            tracker,
            t: 1,
            plan: None,
            confidence: None,
            replan: true,
            pending: None,
            history: Vec::new(),
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    /// Time of the next action (starts at 1).
    pub fn clock(&self) -> u64 {
        self.t
    }

    /// Number of episodes started so far.
    pub fn episode(&self) -> u64 {
        self.history.len() as u64
    }

    pub fn history(&self) -> &[EpisodeRecord] {
        &self.history
    }

    /// Plan of the current episode.
    pub fn plan(&self) -> Option<&PlanResult> {
        self.plan.as_ref()
    }

    /// Confidence set the current episode planned over.
    pub fn confidence(&self) -> Option<&ConfidenceSet> {
        self.confidence.as_ref()
    }

    pub fn tracker(&self) -> &CandidateTracker {
        &self.tracker
    }

    pub fn selected_period(&self) -> usize {
        self.tracker.selected_period()
    }

    /// Whether the next call to [`Agent::act`] starts a new episode.
    pub fn episode_pending(&self) -> bool {
        self.replan
    }

    /// Starts episode `k + 1` at the current time: scores candidates (for
    /// unknown-period kinds), builds the confidence set and plans.
    pub fn begin_episode(&mut self) -> Result<&PlanResult, AgentError> {
        let t_k = self.t;
        self.tracker.start_episode();
        if self.config.kind.unknown_period() {
            let opts = EviOptions::new(1.0 / (t_k as f64).sqrt())
                .with_tau(self.config.tau)
                .with_max_iter(self.config.score_max_iter);
            self.tracker.score_all(opts, self.config.score)?;
            self.tracker.select();
        }
        let stats = self.tracker.selected_stats();
        let set = match self.config.kind.set_kind() {
            SetKind::L1 => pucrl2_confidence(stats, self.config.delta, t_k),
            SetKind::Box => pucrlb_confidence(stats, self.config.delta),
        };
        let opts = EviOptions::new(self.config.epsilon.at(t_k))
            .with_tau(self.config.tau)
            .with_max_iter(self.config.evi_max_iter);
        let plan = modified_evi(&set, opts)?;
        self.history.push(EpisodeRecord {
            index: self.history.len() as u64 + 1,
            start: t_k,
            period: self.tracker.selected_period(),
            gain: plan.gain,
            iterations: plan.iterations,
        });
        self.confidence = Some(set);
        self.replan = false;
        Ok(self.plan.insert(plan))
    }

    /// Chooses the action for `state` at the current time.
    pub fn act(&mut self, state: usize) -> Result<usize, AgentError> {
        if state >= self.states {
            return Err(AgentError::StateRange {
                state,
                states: self.states,
            });
        }
        if self.replan || self.plan.is_none() {
            self.begin_episode()?;
        }
        let action = self.policy_action(state, self.t);
        self.pending = Some((state, action));
        Ok(action)
    }

    /// Records the outcome of the last action and advances the clock.
    ///
    /// Returns `true` when the episode ends, which happens when the action
    /// the current policy would take next has already been played as often
    /// in this episode as before it.
    pub fn absorb(&mut self, reward: f64, next_state: usize) -> Result<bool, AgentError> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(AgentError::RewardRange(reward));
        }
        if next_state >= self.states {
            return Err(AgentError::StateRange {
                state: next_state,
                states: self.states,
            });
        }
        let (state, action) = self.pending.take().ok_or(AgentError::NoPendingAction)?;
        self.tracker.update_all(self.t, state, action, reward, next_state);
        self.t += 1;

        let next_action = self.policy_action(next_state, self.t);
        let stats = self.tracker.selected_stats();
        let shape = stats.shape();
        let x = shape.aug_index(next_state, phase_of(self.t, shape.period) - 1);
        if stats.doubling_reached(shape.pair(x, next_action)) {
            self.replan = true;
        }
        Ok(self.replan)
    }

    fn policy_action(&self, state: usize, t: u64) -> usize {
        let plan = self.plan.as_ref().expect("an episode plan exists");
        let period = plan.policy.shape().period;
        plan.policy.action_at(state, phase_of(t, period))
    }

    pub fn snapshot(&self) -> AgentSnapshot {
        AgentSnapshot {
            config: self.config.clone(),
            states: self.states,
            actions: self.actions,
            tracker: self.tracker.clone(),
            t: self.t,
            plan: self.plan.clone(),
            confidence: self.confidence.clone(),
            replan: self.replan,
            pending: self.pending,
            history: self.history.clone(),
        }
    }

    pub fn resume(snapshot: AgentSnapshot) -> Result<Self, AgentError> {
        snapshot.config.validate()?;
        if snapshot.tracker.periods() != snapshot.config.periods.as_slice() {
            return Err(AgentError::Snapshot("candidate periods differ from the configuration".into()));
        }
        let (s, a) = (snapshot.states, snapshot.actions);
        let stats = snapshot.tracker.selected_stats();
        if stats.shape().states != s || stats.shape().actions != a {
            return Err(AgentError::Snapshot("statistics have the wrong dimensions".into()));
        }
        let consumed = snapshot.t.checked_sub(1).ok_or_else(|| AgentError::Snapshot("clock is zero".into()))?;
        if stats.total_visits() != consumed {
            return Err(AgentError::Snapshot(format!(
                "{} recorded visits but the clock is at {}",
                stats.total_visits(),
                snapshot.t
            )));
        }
        if snapshot.plan.is_none() && !snapshot.replan {
            return Err(AgentError::Snapshot("no plan and no pending episode".into()));
        }
        Ok(Self {
            config: snapshot.config,
            states: s,
            actions: a,
            tracker: snapshot.tracker,
            t: snapshot.t,
            plan: snapshot.plan,
            confidence: snapshot.confidence,
            replan: snapshot.replan,
            pending: snapshot.pending,
            history: snapshot.history,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::AlgorithmKind;

    fn run_single_state(kind: AlgorithmKind, periods: Vec<usize>, steps: u64) -> Agent {
        let mut agent = Agent::new(AgentConfig::new(kind, periods), 1, 1).unwrap();
        for _ in 0..steps {
            assert_eq!(agent.act(0).unwrap(), 0);
            agent.absorb(0.5, 0).unwrap();
        }
        agent
    }

    #[test]
    fn episode_lengths_on_the_trivial_instance() {
        let agent = run_single_state(AlgorithmKind::Pucrl2, vec![2], 32);
        let starts: Vec<u64> = agent.history().iter().map(|e| e.start).collect();
        assert_eq!(starts, vec![1, 3, 5, 9, 17]);
    }

    #[test]
    fn conservation() {
        let agent = run_single_state(AlgorithmKind::UPucrlb, vec![2, 3], 50);
        for i in 0..2 {
            assert_eq!(agent.tracker().stats(i).total_visits(), 50);
        }
        assert_eq!(agent.clock(), 51);
    }

    #[test]
    fn protocol_errors() {
        let mut agent = Agent::new(AgentConfig::new(AlgorithmKind::Pucrlb, vec![3]), 2, 2).unwrap();
        assert_eq!(agent.absorb(0.0, 0), Err(AgentError::NoPendingAction));
        assert!(matches!(agent.act(2), Err(AgentError::StateRange { .. })));
        agent.act(0).unwrap();
        assert_eq!(agent.absorb(1.5, 0), Err(AgentError::RewardRange(1.5)));
        assert!(matches!(agent.absorb(0.5, 7), Err(AgentError::StateRange { .. })));
        assert!(agent.absorb(0.5, 1).is_ok());
    }

    #[test]
    fn snapshot_round_trip() {
        let agent = run_single_state(AlgorithmKind::Pucrl2, vec![3], 20);
        let mut resumed = Agent::resume(agent.snapshot()).unwrap();
        let mut original = agent.clone();
        for _ in 0..20 {
            assert_eq!(resumed.act(0).unwrap(), original.act(0).unwrap());
            assert_eq!(resumed.absorb(0.5, 0).unwrap(), original.absorb(0.5, 0).unwrap());
        }
        assert_eq!(resumed, original);

        let mut bad = agent.snapshot();
        bad.t += 1;
        assert!(Agent::resume(bad).is_err());
    }
}
