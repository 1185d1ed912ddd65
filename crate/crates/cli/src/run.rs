//! The `run` subcommand: simulate every (algorithm, seed) pair and write
//! logs, aggregated curves, plots and a manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use periodic_rl::analysis::{aggregate, regret_curve_with, GainCache, RegretMode};
use periodic_rl::envs::simulate;
use periodic_rl::{Agent, AgentConfig, PmdpSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::plot::{line_chart, Series};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: String,
    pub config_hash: String,
    pub env: String,
    pub spec_hash: String,
    pub rho_star: f64,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<String>,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
}

/// Sidecar of a trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub algorithm: String,
    pub kind: String,
    pub seed: u64,
    pub delta: f64,
    pub periods: Vec<usize>,
    pub noise: String,
    pub horizon: u64,
    pub episodes: u64,
    pub config_hash: String,
}

/// Final aggregate of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub runs: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_regret: f64,
    pub std_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub out: PathBuf,
    pub rho_star: f64,
    pub algorithms: Vec<AlgorithmSummary>,
    pub files: Vec<FileEntry>,
}

/// Where produced files go.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Write,
    /// Recompute everything, write nothing, and compare against the manifest.
    Verify,
}

struct Sink<'a> {
    root: &'a Path,
    mode: Mode,
}

impl Sink<'_> {
    fn emit(&self, rel: &str, bytes: &[u8]) -> Result<FileEntry, CliError> {
        if self.mode == Mode::Write {
            write_atomic(&self.root.join(rel), bytes)?;
        }
        Ok(FileEntry {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Time points kept in curve files: multiples of `stride`, plus the horizon.
pub fn sample_times(horizon: u64, stride: u64) -> Vec<u64> {
    let mut ts: Vec<u64> = (1..=horizon / stride).map(|i| i * stride).collect();
    if ts.last() != Some(&horizon) {
        ts.push(horizon);
    }
    ts
}

struct Sampled {
    regret: Vec<f64>,
    reward: Vec<f64>,
    files: Vec<FileEntry>,
}

pub fn execute(config: &ExperimentConfig, out: &Path, jobs: usize, mode: Mode) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let spec = config.env.build()?;
    let agents: Vec<(String, AgentConfig)> = config
        .algorithms
        .iter()
        .map(|a| Ok((a.label.clone(), a.agent_config(spec.period()).map_err(|e| CliError::Invalid(e.to_string()))?)))
        .collect::<Result<_, CliError>>()?;
    let rho_star = GainCache::new().rho_star(&spec)?;
    let times = sample_times(config.horizon, config.stride);
    let sink = Sink { root: out, mode };
    let config_hash = config.hash();

    let units: Vec<(usize, u64)> = (0..agents.len())
        .flat_map(|i| config.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let total = units.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<Sampled> = pool.install(|| {
        units
            .par_iter()
            .map(|&(i, seed)| {
                let (label, agent_config) = &agents[i];
                let sampled = run_one(
                    &spec,
                    label,
                    agent_config,
                    seed,
                    config,
                    rho_star,
                    &times,
                    &config_hash,
                    &sink,
                )?;
                let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                eprintln!("[{k}/{total}] {label} seed {seed}");
                Ok(sampled)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let mut files: Vec<FileEntry> = results.iter().flat_map(|r| r.files.iter().cloned()).collect();
    let mut summaries = Vec::new();
    let mut chart_regret = Vec::new();
    let mut chart_reward = Vec::new();
    for (i, (label, _)) in agents.iter().enumerate() {
        let runs: Vec<&Sampled> = units
            .iter()
            .zip(&results)
            .filter(|((j, _), _)| *j == i)
            .map(|(_, r)| r)
            .collect();
        let regret = aggregate(&runs.iter().map(|r| r.regret.as_slice()).collect::<Vec<_>>())?;
        let reward = aggregate(&runs.iter().map(|r| r.reward.as_slice()).collect::<Vec<_>>())?;
        let mut csv = String::from("t,mean_regret,std_regret,mean_reward,std_reward\n");
        for (j, t) in times.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{t},{:.6},{:.6},{:.6},{:.6}",
                regret.mean[j], regret.std[j], reward.mean[j], reward.std[j]
            );
        }
        files.push(sink.emit(&format!("curves/{label}.csv"), csv.as_bytes())?);
        let last = times.len() - 1;
        summaries.push(AlgorithmSummary {
            algorithm: label.clone(),
            runs: runs.len(),
            mean_reward: reward.mean[last],
            std_reward: reward.std[last],
            mean_regret: regret.mean[last],
            std_regret: regret.std[last],
        });
        chart_regret.push((label.clone(), regret));
        chart_reward.push((label.clone(), reward));
    }

    if config.plots {
        let suffix = match config.regret {
            RegretMode::Mean => "mean rewards",
            RegretMode::Realized => "realized rewards",
        };
        for (name, title, data) in [
            ("cumulative_reward", format!("Cumulative reward ({suffix})"), &chart_reward),
            ("cumulative_regret", format!("Cumulative regret ({suffix})"), &chart_regret),
        ] {
            let series: Vec<Series<'_>> = data
                .iter()
                .map(|(label, agg)| Series {
                    label,
                    t: &times,
                    mean: &agg.mean,
                    std: &agg.std,
                })
                .collect();
            let svg = line_chart(&title, name.replace('_', " ").as_str(), &series);
            files.push(sink.emit(&format!("plots/{name}.svg"), svg.as_bytes())?);
        }
    }

    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest_path = out.join(MANIFEST);
    match mode {
        Mode::Write => {
            let manifest = Manifest {
                config: config.source.clone(),
                config_hash,
                env: config.env.to_string(),
                spec_hash: sha256_hex(spec.to_text().as_bytes()),
                rho_star,
                horizon: config.horizon,
                seeds: config.seeds.clone(),
                algorithms: agents.iter().map(|(l, _)| l.clone()).collect(),
                wall_clock_seconds: started.elapsed().as_secs_f64(),
                files: files.clone(),
            };
            let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
            write_atomic(&manifest_path, json.as_bytes())?;
        }
        Mode::Verify => verify_against(&manifest_path, out, &files)?,
    }
    Ok(RunSummary {
        out: out.to_path_buf(),
        rho_star,
        algorithms: summaries,
        files,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    spec: &PmdpSpec,
    label: &str,
    agent_config: &AgentConfig,
    seed: u64,
    config: &ExperimentConfig,
    rho_star: f64,
    times: &[u64],
    config_hash: &str,
    sink: &Sink<'_>,
) -> Result<Sampled, CliError> {
    let wrap = |error| CliError::Run {
        label: label.to_string(),
        seed,
        error,
    };
    let mut agent = Agent::new(agent_config.clone(), spec.states(), spec.actions())
        .map_err(|e| wrap(e.into()))?;
    let mut log = simulate(spec, &mut agent, config.horizon, seed).map_err(wrap)?;
    log.meta.algorithm = label.to_string();
    log.meta.config_hash = config_hash.to_string();
    let curve = regret_curve_with(&log, spec, rho_star, config.regret).map_err(wrap)?;
    let mut files = Vec::new();
    if config.logs {
        let stem = format!("logs/{label}_seed{seed}");
        files.push(sink.emit(&format!("{stem}.csv"), log.to_csv().as_bytes())?);
        let meta = RunMeta {
            algorithm: label.to_string(),
            kind: agent_config.kind.name().to_string(),
            seed,
            delta: agent_config.delta,
            periods: agent_config.periods.clone(),
            noise: agent_config.noise.name().to_string(),
            horizon: config.horizon,
            episodes: agent.episode(),
            config_hash: config_hash.to_string(),
        };
        let json = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Runtime(e.to_string()))?;
        files.push(sink.emit(&format!("{stem}.meta.json"), json.as_bytes())?);
    }
    let pick = |series: &[f64]| times.iter().map(|&t| series[t as usize - 1]).collect::<Vec<f64>>();
    Ok(Sampled {
        regret: pick(&curve.regret),
        reward: pick(&curve.reward),
        files,
    })
}

fn verify_against(manifest_path: &Path, out: &Path, recomputed: &[FileEntry]) -> Result<(), CliError> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| CliError::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", manifest_path.display())))?;
    if manifest.files.len() != recomputed.len() {
        return Err(CliError::Invalid(format!(
            "manifest lists {} files, recomputation produced {}",
            manifest.files.len(),
            recomputed.len()
        )));
    }
    for (want, got) in manifest.files.iter().zip(recomputed) {
        if want != got {
            return Err(CliError::Invalid(format!("hash mismatch for {}", got.path)));
        }
        let path = out.join(&want.path);
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        if sha256_hex(&bytes) != want.sha256 {
            return Err(CliError::Invalid(format!("{} on disk differs from the manifest", want.path)));
        }
    }
    Ok(())
}
