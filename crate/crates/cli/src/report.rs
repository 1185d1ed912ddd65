//! The `bound-check` and `validate` subcommands.

use std::fmt::Write as _;
use std::path::Path;

use periodic_rl::analysis::{gamma_sum, variation_budget, BoundInputs, BoundReport, GainCache, DEFAULT_BETA};
use periodic_rl::learners::AlgorithmKind;
use periodic_rl::planner::{diameter, SetKind};
use periodic_rl::{augment, PmdpSpec};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::run::write_atomic;
use crate::selector::EnvSelector;

/// Empirical regret of one algorithm against its theoretical bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub algorithm: String,
    pub bound: String,
    pub checked_points: usize,
    pub worst_t: u64,
    pub worst_regret: f64,
    pub worst_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub env: String,
    pub report: BoundReport,
    pub verdicts: Vec<Verdict>,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn render(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let i = &r.inputs;
        let _ = writeln!(
            s,
            "D_aug = {:.6}  S = {}  N = {}  A = {}  T = {}  delta = {}",
            i.d_aug, i.states, i.period, i.actions, i.horizon, i.delta
        );
        let _ = writeln!(s, "theorem1 = {:.6e}", r.theorem1);
        let _ = writeln!(
            s,
            "theorem2 = {:.6e}  (beta = {}, delta1 = {:.6e}, delta2 = {:.6e})",
            r.theorem2.total(),
            r.beta,
            r.theorem2.delta1,
            r.theorem2.delta2
        );
        if let Some(g) = r.theorem2_gamma {
            let _ = writeln!(s, "theorem2 (support-sum form) = {:.6e}", g.total());
        }
        for v in &self.verdicts {
            let _ = writeln!(
                s,
                "{} {}: worst regret/bound at t = {}: {:.3} <= {:.6e} ({}, {} points)",
                if v.pass { "PASS" } else { "FAIL" },
                v.algorithm,
                v.worst_t,
                v.worst_regret,
                v.worst_bound,
                v.bound,
                v.checked_points
            );
        }
        s
    }
}

fn bound_at(report: &BoundReport, kind: AlgorithmKind, t: u64) -> Result<f64, CliError> {
    let inputs = BoundInputs {
        horizon: t as f64,
        ..report.inputs
    };
    let single = BoundReport::new(inputs, report.beta, None)?;
    Ok(match kind.set_kind() {
        SetKind::L1 => single.theorem1,
        SetKind::Box => single.theorem2.total(),
    })
}

/// Evaluates both bounds for the configured environment and, when `runs`
/// holds the output of `run`, checks each curve against its bound.
pub fn bound_check(config: &ExperimentConfig, runs: Option<&Path>) -> Result<BoundCheck, CliError> {
    let spec = config.env.build()?;
    let model = augment(&spec);
    let d_aug = diameter(&model)
        .ok_or_else(|| CliError::Invalid("the augmented model has infinite diameter".into()))?;
    let inputs = BoundInputs::new(d_aug, spec.states(), spec.period(), spec.actions(), config.horizon as f64, config.delta());
    let report = BoundReport::new(inputs, DEFAULT_BETA, Some(gamma_sum(&model)))
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut verdicts = Vec::new();
    if let Some(dir) = runs {
        for alg in &config.algorithms {
            let path = dir.join("curves").join(format!("{}.csv", alg.label));
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let mut worst = (0u64, 0.0f64, f64::INFINITY, f64::NEG_INFINITY);
            let mut points = 0;
            for (i, line) in text.lines().enumerate().skip(1) {
                let mut fields = line.split(',');
                let bad = || CliError::Invalid(format!("{}:{}: malformed curve row", path.display(), i + 1));
                let t: u64 = fields.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                let regret: f64 = fields.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                if t < 2 {
                    continue;
                }
                let bound = bound_at(&report, alg.kind, t)?;
                points += 1;
                if regret / bound > worst.3 {
                    worst = (t, regret, bound, regret / bound);
                }
            }
            verdicts.push(Verdict {
                algorithm: alg.label.clone(),
                bound: match alg.kind.set_kind() {
                    SetKind::L1 => "theorem1".into(),
                    SetKind::Box => "theorem2".into(),
                },
                checked_points: points,
                worst_t: worst.0,
                worst_regret: worst.1,
                worst_bound: worst.2,
                pass: points > 0 && worst.1 <= worst.2,
            });
        }
    }
    Ok(BoundCheck {
        env: config.env.to_string(),
        report,
        verdicts,
    })
}

pub fn write_bound_check(check: &BoundCheck, out: &Path) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(check).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&out.join("bound_report.json"), json.as_bytes())
}

/// Human-readable summary of a model: dimensions, optimal gain, diameter,
/// one period of reward variation and the phase tables.
pub fn validate_env(selector: &str) -> Result<String, CliError> {
    let selector = EnvSelector::parse(selector).map_err(CliError::Invalid)?;
    let spec = selector.build()?;
    describe(&spec)
}

pub fn describe(spec: &PmdpSpec) -> Result<String, CliError> {
    let model = augment(spec);
    let rho = GainCache::new().rho_star(spec)?;
    let d = diameter(&model);
    let budget = variation_budget(spec, spec.period() as u64 + 1)?;
    let mut s = String::new();
    let _ = writeln!(s, "S = {}  A = {}  N = {}", spec.states(), spec.actions(), spec.period());
    let _ = writeln!(s, "rho* = {rho:.9}");
    match d {
        Some(d) => {
            let _ = writeln!(s, "D_aug = {d:.6}");
        }
        None => {
            let _ = writeln!(s, "D_aug = infinite");
        }
    }
    let _ = writeln!(s, "B_r over one period = {budget:.6}");
    for n in 1..=spec.period() {
        let _ = writeln!(s, "phase {n}");
        for st in 0..spec.states() {
            for a in 0..spec.actions() {
                let row: Vec<String> = spec.kernel(n, st, a).iter().map(|p| format!("{p:.6}")).collect();
                let _ = writeln!(
                    s,
                    "  s{} a{}  r = {:.6}  p = [{}]",
                    st + 1,
                    a + 1,
                    spec.reward(n, st, a),
                    row.join(", ")
                );
            }
        }
    }
    Ok(s)
}
