//! Experiment configuration files.
//!
//! A flat `key = value` format. Top-level keys come first; each
//! `[algorithm]` line opens a block of per-algorithm keys. `#` starts a
//! comment.
//!
//! ```text
//! env = sawtooth:5
//! horizon = 100000
//! seeds = 0..30
//! noise = deterministic
//!
//! [algorithm]
//! kind = pucrlb
//!
//! [algorithm]
//! kind = u-pucrl2
//! periods = 2,3,4,5,6,7
//! ```

use std::collections::HashSet;
use std::path::PathBuf;

use periodic_rl::analysis::RegretMode;
use periodic_rl::envs::RewardNoise;
use periodic_rl::learners::{AgentConfig, AlgorithmKind, EpsilonSchedule, ScoreMode};
use periodic_rl::planner::{DEFAULT_MAX_ITER, DEFAULT_TAU};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::selector::EnvSelector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmEntry {
    /// Output name; defaults to the algorithm name.
    pub label: String,
    pub kind: AlgorithmKind,
    pub delta: f64,
    pub tau: f64,
    /// Known period or candidate set; known-period kinds default to the
    /// environment's period.
    pub periods: Option<Vec<usize>>,
    pub epsilon: Option<EpsilonSchedule>,
    pub noise: RewardNoise,
    pub score: ScoreMode,
    pub evi_max_iter: usize,
    pub score_max_iter: usize,
    /// Line of the `[algorithm]` header.
    pub line: usize,
}

impl AlgorithmEntry {
    /// Agent configuration against an environment of period `env_period`.
    pub fn agent_config(&self, env_period: usize) -> Result<AgentConfig, ConfigError> {
        let periods = match (&self.periods, self.kind) {
            (Some(p), _) => p.clone(),
            (None, kind) if kind.unknown_period() => {
                return Err(err(self.line, format!("`{}` needs a `periods` candidate set", self.label)))
            }
            (None, _) => vec![env_period],
        };
        let mut config = AgentConfig::new(self.kind, periods)
            .with_delta(self.delta)
            .with_tau(self.tau)
            .with_noise(self.noise);
        if let Some(eps) = self.epsilon {
            config.epsilon = eps;
        }
        config.score = self.score;
        config.evi_max_iter = self.evi_max_iter;
        config.score_max_iter = self.score_max_iter;
        config.validate().map_err(|e| err(self.line, format!("`{}`: {e}", self.label)))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvSelector,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    /// Down-sampling stride of curve files.
    pub stride: u64,
    pub plots: bool,
    /// Whether per-run trajectory logs are written.
    pub logs: bool,
    pub regret: RegretMode,
    pub algorithms: Vec<AlgorithmEntry>,
    /// The file contents, echoed into the manifest.
    pub source: String,
}

impl ExperimentConfig {
    /// SHA-256 of the configuration text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.source.as_bytes()))
    }

    /// Confidence parameter used for bound evaluation: the first algorithm's.
    pub fn delta(&self) -> f64 {
        self.algorithms[0].delta
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Parser::default().run(text)
    }
}

struct Defaults {
    delta: f64,
    tau: f64,
    noise: RewardNoise,
    score: ScoreMode,
}

/// `(line, key, value)` of one block entry.
type Entry = (usize, String, String);

#[derive(Default)]
struct Parser {
    env: Option<EnvSelector>,
    horizon: Option<u64>,
    seeds: Option<Vec<u64>>,
    out: Option<PathBuf>,
    stride: Option<u64>,
    plots: Option<bool>,
    logs: Option<bool>,
    regret: Option<RegretMode>,
    delta: Option<f64>,
    tau: Option<f64>,
    noise: Option<RewardNoise>,
    score: Option<ScoreMode>,
    blocks: Vec<(usize, Vec<Entry>)>,
}

impl Parser {
    fn run(mut self, text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut seen = HashSet::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if content.starts_with('[') {
                if content != "[algorithm]" {
                    return Err(err(line, format!("unknown section `{content}`")));
                }
                self.blocks.push((line, Vec::new()));
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if value.is_empty() {
                return Err(err(line, format!("`{key}` has no value")));
            }
            match self.blocks.last_mut() {
                Some((_, entries)) => {
                    if entries.iter().any(|(_, k, _)| *k == key) {
                        return Err(err(line, format!("duplicate key `{key}`")));
                    }
                    entries.push((line, key, value));
                }
                None => {
                    if !seen.insert(key.clone()) {
                        return Err(err(line, format!("duplicate key `{key}`")));
                    }
                    self.top_level(line, &key, &value)?;
                }
            }
        }
        self.finish(text, last_line.max(1))
    }

    fn top_level(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "env" => self.env = Some(EnvSelector::parse(value).map_err(|e| err(line, e))?),
            "horizon" => self.horizon = Some(parse_num(line, key, value)?),
            "seeds" => self.seeds = Some(parse_seeds(line, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "stride" => self.stride = Some(parse_num(line, key, value)?),
            "plots" => self.plots = Some(parse_bool(line, key, value)?),
            "logs" => self.logs = Some(parse_bool(line, key, value)?),
            "regret" => {
                self.regret = Some(match value {
                    "mean" => RegretMode::Mean,
                    "realized" => RegretMode::Realized,
                    _ => return Err(err(line, format!("unknown regret mode `{value}`"))),
                })
            }
            "delta" => self.delta = Some(parse_num(line, key, value)?),
            "tau" => self.tau = Some(parse_num(line, key, value)?),
            "noise" => self.noise = Some(value.parse().map_err(|e| err(line, format!("{e}")))?),
            "score" => self.score = Some(parse_score(line, value)?),
            _ => return Err(err(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn finish(self, text: &str, last_line: usize) -> Result<ExperimentConfig, ConfigError> {
        let env = self.env.ok_or_else(|| err(last_line, "missing `env`"))?;
        let horizon = self.horizon.ok_or_else(|| err(last_line, "missing `horizon`"))?;
        if horizon == 0 {
            return Err(err(last_line, "`horizon` must be at least 1"));
        }
        let seeds = self.seeds.ok_or_else(|| err(last_line, "missing `seeds`"))?;
        let stride = self.stride.unwrap_or(100);
        if stride == 0 {
            return Err(err(last_line, "`stride` must be positive"));
        }
        let defaults = Defaults {
            delta: self.delta.unwrap_or(0.05),
            tau: self.tau.unwrap_or(DEFAULT_TAU),
            noise: self.noise.unwrap_or(RewardNoise::Bernoulli),
            score: self.score.unwrap_or(ScoreMode::Cumulative),
        };
        if self.blocks.is_empty() {
            return Err(err(last_line, "no `[algorithm]` block"));
        }
        let mut algorithms = Vec::new();
        let mut labels = HashSet::new();
        for (header, entries) in &self.blocks {
            let entry = algorithm_block(*header, entries, &defaults)?;
            if !labels.insert(entry.label.clone()) {
                return Err(err(*header, format!("duplicate algorithm label `{}`", entry.label)));
            }
            algorithms.push(entry);
        }
        Ok(ExperimentConfig {
            env,
            horizon,
            seeds,
            out: self.out,
            stride,
            plots: self.plots.unwrap_or(true),
            logs: self.logs.unwrap_or(true),
            regret: self.regret.unwrap_or_default(),
            algorithms,
            source: text.to_string(),
        })
    }
}

fn algorithm_block(
    header: usize,
    entries: &[(usize, String, String)],
    defaults: &Defaults,
) -> Result<AlgorithmEntry, ConfigError> {
    let mut kind = None;
    let mut label = None;
    let mut entry = AlgorithmEntry {
        label: String::new(),
        kind: AlgorithmKind::Pucrl2,
        delta: defaults.delta,
        tau: defaults.tau,
        periods: None,
        epsilon: None,
        noise: defaults.noise,
        score: defaults.score,
        evi_max_iter: DEFAULT_MAX_ITER,
        score_max_iter: AgentConfig::new(AlgorithmKind::UPucrl2, vec![2]).score_max_iter,
        line: header,
    };
    for (line, key, value) in entries {
        let line = *line;
        match key.as_str() {
            "kind" => kind = Some(value.parse::<AlgorithmKind>().map_err(|e| err(line, format!("{e}")))?),
            "label" => {
                if !value.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                    return Err(err(line, "labels may only contain letters, digits, `-` and `_`"));
                }
                label = Some(value.clone())
            }
            "delta" => entry.delta = parse_num(line, key, value)?,
            "tau" => entry.tau = parse_num(line, key, value)?,
            "periods" => entry.periods = Some(parse_list(line, value)?),
            "epsilon" => entry.epsilon = Some(value.parse().map_err(|e| err(line, format!("{e}")))?),
            "noise" => entry.noise = value.parse().map_err(|e| err(line, format!("{e}")))?,
            "score" => entry.score = parse_score(line, value)?,
            "evi_max_iter" => entry.evi_max_iter = parse_num(line, key, value)?,
            "score_max_iter" => entry.score_max_iter = parse_num(line, key, value)?,
            _ => return Err(err(line, format!("unknown algorithm key `{key}`"))),
        }
    }
    entry.kind = kind.ok_or_else(|| err(header, "algorithm block without `kind`"))?;
    entry.label = label.unwrap_or_else(|| entry.kind.name().to_string());
    if !(entry.delta > 0.0 && entry.delta < 1.0) {
        return Err(err(header, format!("delta {} outside (0, 1)", entry.delta)));
    }
    Ok(entry)
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .replace('_', "")
        .parse()
        .map_err(|_| err(line, format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(err(line, format!("`{key}`: expected true or false"))),
    }
}

fn parse_score(line: usize, value: &str) -> Result<ScoreMode, ConfigError> {
    match value {
        "cumulative" => Ok(ScoreMode::Cumulative),
        "latest" => Ok(ScoreMode::Latest),
        _ => Err(err(line, format!("unknown score mode `{value}`"))),
    }
}

fn parse_list(line: usize, value: &str) -> Result<Vec<usize>, ConfigError> {
    let list: Vec<usize> = value
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| err(line, format!("cannot parse `{}`", v.trim()))))
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(err(line, "empty list"));
    }
    Ok(list)
}

/// `a..b` (half open) or a comma-separated list.
fn parse_seeds(line: usize, value: &str) -> Result<Vec<u64>, ConfigError> {
    let seeds: Vec<u64> = if let Some((a, b)) = value.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| err(line, "bad seed range start"))?;
        let b: u64 = b.trim().parse().map_err(|_| err(line, "bad seed range end"))?;
        (a..b).collect()
    } else {
        value
            .split(',')
            .map(|v| v.trim().parse().map_err(|_| err(line, format!("cannot parse seed `{}`", v.trim()))))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(err(line, "seed list is empty"));
    }
    let unique: HashSet<_> = seeds.iter().collect();
    if unique.len() != seeds.len() {
        return Err(err(line, "seeds must be distinct"));
    }
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
env = sawtooth:5
horizon = 1_000
seeds = 0..3
noise = deterministic

[algorithm]
kind = pucrlb

[algorithm]
kind = u-pucrl2
label = unknown
periods = 2, 3, 5
score = latest
";

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.horizon, 1000);
        assert_eq!(cfg.seeds, vec![0, 1, 2]);
        assert_eq!(cfg.stride, 100);
        assert_eq!(cfg.algorithms.len(), 2);
        let known = cfg.algorithms[0].agent_config(5).unwrap();
        assert_eq!(known.periods, vec![5]);
        assert_eq!(known.noise, RewardNoise::Deterministic);
        let unknown = &cfg.algorithms[1];
        assert_eq!(unknown.label, "unknown");
        assert_eq!(unknown.agent_config(5).unwrap().score, ScoreMode::Latest);
    }

    #[test]
    fn errors_name_lines() {
        let bad = SAMPLE.replace("seeds = 0..3", "seeds = 0..x");
        assert_eq!(ExperimentConfig::parse(&bad).unwrap_err().line, 3);
        let bad = SAMPLE.replace("kind = pucrlb", "kind = psrl");
        assert_eq!(ExperimentConfig::parse(&bad).unwrap_err().line, 7);
        let bad = format!("{SAMPLE}colour = red\n");
        assert_eq!(ExperimentConfig::parse(&bad).unwrap_err().line, 14);
        let bad = SAMPLE.replace("horizon = 1_000\n", "");
        assert!(ExperimentConfig::parse(&bad).unwrap_err().message.contains("horizon"));
    }

    #[test]
    fn unknown_period_needs_candidates() {
        let text = SAMPLE.replace("periods = 2, 3, 5\n", "");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let e = cfg.algorithms[1].agent_config(5).unwrap_err();
        assert_eq!(e.line, 9);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let text = format!("{SAMPLE}\n[algorithm]\nkind = pucrlb\n");
        assert!(ExperimentConfig::parse(&text).unwrap_err().message.contains("duplicate"));
    }
}
