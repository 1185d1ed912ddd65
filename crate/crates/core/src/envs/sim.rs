use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AgentError, RunError};
use crate::learners::Agent;
use crate::model::{phase_of, PmdpSpec};

/// How observed rewards relate to the mean reward table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RewardNoise {
    /// Reward 1 with probability `r_n(s, a)`, else 0.
    Bernoulli,
    /// The mean reward itself.
    Deterministic,
}

impl FromStr for RewardNoise {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bernoulli" => Ok(RewardNoise::Bernoulli),
            "deterministic" => Ok(RewardNoise::Deterministic),
            _ => Err(AgentError::Config(format!("unknown reward noise `{s}`"))),
        }
    }
}

impl RewardNoise {
    pub fn name(self) -> &'static str {
        match self {
            RewardNoise::Bernoulli => "bernoulli",
            RewardNoise::Deterministic => "deterministic",
        }
    }
}

/// A seeded periodic environment. Starts in state 0 at time 1.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: PmdpSpec,
    noise: RewardNoise,
    state: usize,
    t: u64,
    rng: ChaCha8Rng,
}

impl Environment {
    pub fn new(spec: PmdpSpec, noise: RewardNoise, seed: u64) -> Self {
        Self {
            spec,
            noise,
            state: 0,
            t: 1,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn spec(&self) -> &PmdpSpec {
        &self.spec
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn clock(&self) -> u64 {
        self.t
    }

    pub fn phase(&self) -> usize {
        phase_of(self.t, self.spec.period())
    }

    /// Plays `action`, returning the observed reward and the next state.
    pub fn step(&mut self, action: usize) -> (f64, usize) {
        let phase = self.phase();
        let mean = self.spec.reward(phase, self.state, action);
        let reward = match self.noise {
            RewardNoise::Bernoulli => {
                if self.rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardNoise::Deterministic => mean,
        };
        let row = self.spec.kernel(phase, self.state, action);
        let u = self.rng.random::<f64>();
        let mut acc = 0.0;
        let mut next = row.iter().rposition(|&p| p > 0.0).expect("rows carry mass");
        for (s, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc && p > 0.0 {
                next = s;
                break;
            }
        }
        self.state = next;
        self.t += 1;
        (reward, next)
    }
}

/// One interaction step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub t: u64,
    pub s: usize,
    /// Phase of the environment, 1-based.
    pub n: usize,
    pub a: usize,
    pub r: f64,
    pub s_next: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMeta {
    pub algorithm: String,
    pub seed: u64,
    pub delta: f64,
    pub periods: Vec<usize>,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub meta: LogMeta,
    pub steps: Vec<Step>,
}

impl TrajectoryLog {
    pub const CSV_HEADER: &'static str = "t,s,n,a,r,s_next";

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// CSV with header `t,s,n,a,r,s_next`; states and actions are 0-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.steps.len() * 20 + 20);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for st in &self.steps {
            let _ = writeln!(out, "{},{},{},{},{},{}", st.t, st.s, st.n, st.a, st.r, st.s_next);
        }
        out
    }

    pub fn from_csv(meta: LogMeta, text: &str) -> Result<Self, RunError> {
        let mut lines = text.lines();
        if lines.next() != Some(Self::CSV_HEADER) {
            return Err(RunError::InvalidInput("missing trajectory header".into()));
        }
        let mut steps = Vec::new();
        for (i, line) in lines.enumerate() {
            let bad = |what: &str| RunError::InvalidInput(format!("line {}: {what}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad("expected 6 fields"));
            }
            let int = |j: usize| f[j].parse::<u64>().map_err(|_| bad("not an integer"));
            steps.push(Step {
                t: int(0)?,
                s: int(1)? as usize,
                n: int(2)? as usize,
                a: int(3)? as usize,
                r: f[4].parse().map_err(|_| bad("not a number"))?,
                s_next: int(5)? as usize,
            });
        }
        Ok(Self { meta, steps })
    }

    /// Consecutive times and chained states.
    pub fn is_consistent(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].t == w[0].t + 1 && w[1].s == w[0].s_next)
            && self.steps.first().is_none_or(|s| s.t == 1)
    }
}

/// Runs `agent` against `spec` for `horizon` steps.
pub fn simulate(spec: &PmdpSpec, agent: &mut Agent, horizon: u64, seed: u64) -> Result<TrajectoryLog, RunError> {
    simulate_with(spec, agent, horizon, seed, |_| {})
}

/// [`simulate`], calling `on_episode` right after each new episode is planned.
pub fn simulate_with<F>(
    spec: &PmdpSpec,
    agent: &mut Agent,
    horizon: u64,
    seed: u64,
    mut on_episode: F,
) -> Result<TrajectoryLog, RunError>
where
    F: FnMut(&Agent),
{
    if horizon == 0 {
        return Err(RunError::EmptyHorizon);
    }
    let config = agent.config().clone();
    let meta = LogMeta {
        algorithm: config.kind.name().to_string(),
        seed,
        delta: config.delta,
        periods: config.periods.clone(),
        config_hash: String::new(),
    };
    let mut env = Environment::new(spec.clone(), config.noise, seed);
    let mut steps = Vec::with_capacity(horizon as usize);
    for _ in 0..horizon {
        let (t, s, n) = (env.clock(), env.state(), env.phase());
        let starting = agent.episode_pending();
        let a = agent.act(s)?;
        if starting {
            on_episode(agent);
        }
        if a >= spec.actions() {
            return Err(RunError::Dimensions(format!("agent chose action {a} but A = {}", spec.actions())));
        }
        let (r, s_next) = env.step(a);
        agent.absorb(r, s_next)?;
        steps.push(Step { t, s, n, a, r, s_next });
    }
    Ok(TrajectoryLog { meta, steps })
}
