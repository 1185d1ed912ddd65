use std::fmt;
use std::path::PathBuf;

use periodic_rl::envs::{random_pmdp, sawtooth_env};
use periodic_rl::PmdpSpec;

use crate::error::CliError;

/// Where the ground-truth model comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvSelector {
    /// `sawtooth:N`
    Sawtooth(usize),
    /// `random:S,A,N,seed[,min_mass]`
    Random {
        states: usize,
        actions: usize,
        period: usize,
        seed: u64,
        min_mass: f64,
    },
    /// Any other value: a model file in the text format.
    File(PathBuf),
}

const DEFAULT_MIN_MASS: f64 = 0.05;

impl EnvSelector {
    pub fn parse(text: &str) -> Result<Self, String> {
        if let Some(rest) = text.strip_prefix("sawtooth:") {
            let n: usize = rest.trim().parse().map_err(|_| format!("bad sawtooth period `{rest}`"))?;
            if n < 2 {
                return Err("sawtooth period must be at least 2".into());
            }
            return Ok(EnvSelector::Sawtooth(n));
        }
        if let Some(rest) = text.strip_prefix("random:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if !(4..=5).contains(&parts.len()) {
                return Err("expected `random:S,A,N,seed[,min_mass]`".into());
            }
            let int = |i: usize| parts[i].parse::<u64>().map_err(|_| format!("bad integer `{}`", parts[i]));
            let (states, actions, period) = (int(0)? as usize, int(1)? as usize, int(2)? as usize);
            let min_mass = match parts.get(4) {
                Some(m) => m.parse::<f64>().map_err(|_| format!("bad min_mass `{m}`"))?,
                None => DEFAULT_MIN_MASS.min(1.0 / states.max(1) as f64),
            };
            if states == 0 || actions == 0 {
                return Err("S and A must be positive".into());
            }
            if period < 2 {
                return Err("period must be at least 2".into());
            }
            if !(0.0..=1.0 / states as f64).contains(&min_mass) {
                return Err(format!("min_mass {min_mass} outside [0, 1/S]"));
            }
            return Ok(EnvSelector::Random {
                states,
                actions,
                period,
                seed: int(3)?,
                min_mass,
            });
        }
        if text.trim().is_empty() {
            return Err("empty environment selector".into());
        }
        Ok(EnvSelector::File(PathBuf::from(text)))
    }

    pub fn build(&self) -> Result<PmdpSpec, CliError> {
        match self {
            EnvSelector::Sawtooth(n) => Ok(sawtooth_env(*n)),
            EnvSelector::Random {
                states,
                actions,
                period,
                seed,
                min_mass,
            } => Ok(random_pmdp(*states, *actions, *period, *seed, *min_mass)),
            EnvSelector::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Invalid(format!("cannot read model {}: {e}", path.display())))?;
                PmdpSpec::parse(&text).map_err(|e| CliError::Model {
                    source_name: path.display().to_string(),
                    error: e,
                })
            }
        }
    }
}

impl fmt::Display for EnvSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSelector::Sawtooth(n) => write!(f, "sawtooth:{n}"),
            EnvSelector::Random {
                states,
                actions,
                period,
                seed,
                min_mass,
            } => write!(f, "random:{states},{actions},{period},{seed},{min_mass}"),
            EnvSelector::File(p) => write!(f, "{}", p.display()),
        }
    }
}
