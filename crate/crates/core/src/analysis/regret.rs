use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::envs::TrajectoryLog;
use crate::error::RunError;
use crate::model::{augment, phase_of, PmdpSpec};
use crate::planner::optimal_avg_reward;

/// Which reward a regret curve charges against `rho*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum RegretMode {
    /// Mean reward of the visited pair.
    #[default]
    Mean,
    /// The realized (possibly noisy) reward.
    Realized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    pub rho_star: f64,
    /// Cumulative regret after each step.
    pub regret: Vec<f64>,
    /// Cumulative reward after each step.
    pub reward: Vec<f64>,
}

impl RegretCurve {
    pub fn len(&self) -> usize {
        self.regret.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regret.is_empty()
    }

    pub fn final_regret(&self) -> f64 {
        self.regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_reward(&self) -> f64 {
        self.reward.last().copied().unwrap_or(0.0)
    }
}

/// Regret of a logged run against the optimal gain of `spec`, charged with
/// mean rewards.
pub fn regret_curve(log: &TrajectoryLog, spec: &PmdpSpec) -> Result<RegretCurve, RunError> {
    let rho_star = optimal_avg_reward(&augment(spec))?.gain;
    regret_curve_with(log, spec, rho_star, RegretMode::Mean)
}

/// Regret against a caller-supplied `rho_star`.
pub fn regret_curve_with(
    log: &TrajectoryLog,
    spec: &PmdpSpec,
    rho_star: f64,
    mode: RegretMode,
) -> Result<RegretCurve, RunError> {
    let (ns, na, np) = (spec.states(), spec.actions(), spec.period());
    let mut regret = Vec::with_capacity(log.len());
    let mut reward = Vec::with_capacity(log.len());
    let (mut cum_regret, mut cum_reward) = (0.0, 0.0);
    for st in &log.steps {
        if st.s >= ns || st.s_next >= ns || st.a >= na || st.t == 0 {
            return Err(RunError::Dimensions(format!("step {} does not fit S = {ns}, A = {na}", st.t)));
        }
        if st.n != phase_of(st.t, np) {
            return Err(RunError::Dimensions(format!(
                "step {} logged phase {} but the model's period is {np}",
                st.t, st.n
            )));
        }
        let r = match mode {
            RegretMode::Mean => spec.reward(st.n, st.s, st.a),
            RegretMode::Realized => st.r,
        };
        cum_regret += rho_star - r;
        cum_reward += r;
        regret.push(cum_regret);
        reward.push(cum_reward);
    }
    Ok(RegretCurve {
        rho_star,
        regret,
        reward,
    })
}

/// Pointwise mean and sample standard deviation of equal-length series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub runs: usize,
}

pub fn aggregate<S: AsRef<[f64]>>(series: &[S]) -> Result<Aggregate, RunError> {
    let first = series.first().ok_or_else(|| RunError::InvalidInput("nothing to aggregate".into()))?;
    let len = first.as_ref().len();
    if series.iter().any(|s| s.as_ref().len() != len) {
        return Err(RunError::Dimensions("series lengths differ".into()));
    }
    let k = series.len() as f64;
    let mut mean = vec![0.0; len];
    for s in series {
        mean.iter_mut().zip(s.as_ref()).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= k);
    let mut std = vec![0.0; len];
    if series.len() > 1 {
        for s in series {
            std.iter_mut()
                .zip(s.as_ref().iter().zip(&mean))
                .for_each(|(acc, (v, m))| *acc += (v - m) * (v - m));
        }
        std.iter_mut().for_each(|v| *v = (*v / (k - 1.0)).sqrt());
    }
    Ok(Aggregate {
        mean,
        std,
        runs: series.len(),
    })
}

/// Total reward variation `sum_{t=1}^{T-1} max_{s,a} |r_{t+1}(s,a) - r_t(s,a)|`.
pub fn variation_budget(spec: &PmdpSpec, horizon: u64) -> Result<f64, RunError> {
    if horizon < 2 {
        return Err(RunError::InvalidInput("variation budget needs T >= 2".into()));
    }
    let np = spec.period();
    let jumps: Vec<f64> = (1..=np)
        .map(|n| {
            let next = n % np + 1;
            let mut worst: f64 = 0.0;
            for s in 0..spec.states() {
                for a in 0..spec.actions() {
                    worst = worst.max((spec.reward(next, s, a) - spec.reward(n, s, a)).abs());
                }
            }
            worst
        })
        .collect();
    // Steps t = 1..T-1 visit phases cyclically starting at phase 1.
    let steps = horizon - 1;
    let full = steps / np as u64;
    let rest = (steps % np as u64) as usize;
    let per_cycle: f64 = jumps.iter().sum();
    Ok(full as f64 * per_cycle + jumps[..rest].iter().sum::<f64>())
}

/// Stable content hash of a spec's tables.
pub fn spec_hash(spec: &PmdpSpec) -> u64 {
    let tables = spec.tables();
    let mut h = std::collections::hash_map::DefaultHasher::new();
    (tables.states, tables.actions, tables.period).hash(&mut h);
    tables.rewards.iter().chain(&tables.kernels).for_each(|v| v.to_bits().hash(&mut h));
    h.finish()
}

/// Optimal gains memoized by [`spec_hash`]; safe to share between threads.
#[derive(Debug, Default)]
pub struct GainCache {
    entries: Mutex<HashMap<u64, f64>>,
}

impl GainCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rho_star(&self, spec: &PmdpSpec) -> Result<f64, RunError> {
        let key = spec_hash(spec);
        if let Some(&g) = self.entries.lock().expect("cache lock").get(&key) {
            return Ok(g);
        }
        let gain = optimal_avg_reward(&augment(spec))?.gain;
        self.entries.lock().expect("cache lock").insert(key, gain);
        Ok(gain)
    }
}
