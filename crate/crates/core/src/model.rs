//! Periodic MDPs and their stationary augmentation.
//!
//! A periodic MDP carries one reward table and one transition kernel per
//! phase. Pairing each state with its phase gives an ordinary stationary MDP
//! over `S * N` augmented states whose transitions always advance the phase by
//! one (wrapping `N -> 1`). Rows of that augmented MDP are stored over the
//! `S` original successor states only; the successor phase is implicit.
//!
//! Phases are 1-based in the public API (`1..=N`). Internally tables are laid
//! out by a 0-based phase index, `phase - 1`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Tolerance used when checking that probability rows sum to one.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Phase of global time step `t` (1-based) for a model of the given period.
///
/// Returns `((t - 1) mod N) + 1`. A period of 1 is allowed and yields a
/// constant phase, which is how the stationary baseline is expressed.
pub fn phase_of(t: u64, period: usize) -> usize {
    assert!(t >= 1, "time steps start at 1");
    assert!(period >= 1, "period must be positive");
    ((t - 1) % period as u64) as usize + 1
}

/// The phase that follows `phase`, wrapping `N -> 1`.
pub fn successor_phase(phase: usize, period: usize) -> usize {
    debug_assert!((1..=period).contains(&phase));
    phase % period + 1
}

/// Dimensions of a (possibly augmented) tabular model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub states: usize,
    pub actions: usize,
    pub period: usize,
}

impl Shape {
    pub fn new(states: usize, actions: usize, period: usize) -> Self {
        Self {
            states,
            actions,
            period,
        }
    }

    /// Number of augmented states, `S * N`.
    pub fn aug_states(&self) -> usize {
        self.states * self.period
    }

    /// Number of augmented state-action pairs, `S * N * A`.
    pub fn pairs(&self) -> usize {
        self.aug_states() * self.actions
    }

    /// Augmented index of original state `s` at 0-based phase index `phase_idx`.
    pub fn aug_index(&self, s: usize, phase_idx: usize) -> usize {
        debug_assert!(s < self.states && phase_idx < self.period);
        phase_idx * self.states + s
    }

    /// Inverse of [`Shape::aug_index`]: `(s, phase_idx)`.
    pub fn split(&self, x: usize) -> (usize, usize) {
        (x % self.states, x / self.states)
    }

    /// 0-based index of the phase following `phase_idx`.
    pub fn next_phase_idx(&self, phase_idx: usize) -> usize {
        (phase_idx + 1) % self.period
    }

    pub fn pair(&self, x: usize, a: usize) -> usize {
        x * self.actions + a
    }
}

/// Unvalidated periodic model tables, e.g. straight out of a parser.
///
/// `rewards` is laid out `[phase_idx][s][a]`, `kernels` `[phase_idx][s][a][s']`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmdpTables {
    pub states: usize,
    pub actions: usize,
    pub period: usize,
    pub rewards: Vec<f64>,
    pub kernels: Vec<f64>,
}

/// A validated periodic MDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmdpSpec {
    shape: Shape,
    rewards: Vec<f64>,
    kernels: Vec<f64>,
}

/// Checks every periodic-model invariant and returns the validated spec.
///
/// Rows within [`SIMPLEX_TOL`] of summing to one are renormalized.
pub fn validate_pmdp(tables: PmdpTables) -> Result<PmdpSpec, ModelError> {
    let PmdpTables {
        states,
        actions,
        period,
        rewards,
        mut kernels,
    } = tables;
    if period < 2 {
        return Err(ModelError::PeriodTooShort(period));
    }
    if states == 0 || actions == 0 {
        return Err(ModelError::EmptyDimension);
    }
    let shape = Shape::new(states, actions, period);
    check_len("rewards", shape.pairs(), rewards.len())?;
    check_len("kernels", shape.pairs() * states, kernels.len())?;

    for (pair, &r) in rewards.iter().enumerate() {
        if !(0.0..=1.0).contains(&r) {
            let (phase, state, action) = locate(&shape, pair);
            return Err(ModelError::RewardRange {
                phase,
                state,
                action,
                value: r,
            });
        }
    }
    for (pair, row) in kernels.chunks_mut(states).enumerate() {
        let (phase, state, action) = locate(&shape, pair);
        normalize_row(row).map_err(|e| match e {
            RowDefect::Negative(next) => ModelError::NegativeProbability {
                phase,
                state,
                action,
                next,
            },
            RowDefect::Sum(sum) => ModelError::RowSum {
                phase,
                state,
                action,
                sum,
            },
        })?;
    }
    Ok(PmdpSpec {
        shape,
        rewards,
        kernels,
    })
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), ModelError> {
    if expected != got {
        return Err(ModelError::Dimensions {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

/// `(phase, s, a)` for a flat pair index, phase 1-based.
fn locate(shape: &Shape, pair: usize) -> (usize, usize, usize) {
    let x = pair / shape.actions;
    let (s, phase_idx) = shape.split(x);
    (phase_idx + 1, s, pair % shape.actions)
}

pub(crate) enum RowDefect {
    Negative(usize),
    Sum(f64),
}

/// Validates a probability row and renormalizes it in place.
pub(crate) fn normalize_row(row: &mut [f64]) -> Result<(), RowDefect> {
    if let Some(i) = row.iter().position(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(RowDefect::Negative(i));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(RowDefect::Sum(sum));
    }
    // Rows already normalized up to rounding are left bit-exact so that
    // serialization round-trips.
    if (sum - 1.0).abs() > 1e-12 {
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(())
}

impl PmdpSpec {
    /// Builds and validates a spec from closures over `(phase, s, a)` and
    /// `(phase, s, a, s')`, phases 1-based.
    pub fn from_fn(
        states: usize,
        actions: usize,
        period: usize,
        reward: impl Fn(usize, usize, usize) -> f64,
        kernel: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Result<Self, ModelError> {
        let mut rewards = Vec::with_capacity(states * actions * period);
        let mut kernels = Vec::with_capacity(states * states * actions * period);
        for phase in 1..=period {
            for s in 0..states {
                for a in 0..actions {
                    rewards.push(reward(phase, s, a));
                    kernels.extend((0..states).map(|next| kernel(phase, s, a, next)));
                }
            }
        }
        validate_pmdp(PmdpTables {
            states,
            actions,
            period,
            rewards,
            kernels,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn states(&self) -> usize {
        self.shape.states
    }

    pub fn actions(&self) -> usize {
        self.shape.actions
    }

    pub fn period(&self) -> usize {
        self.shape.period
    }

    /// Mean reward `r_n(s, a)`, `phase` 1-based.
    pub fn reward(&self, phase: usize, s: usize, a: usize) -> f64 {
        self.rewards[self.pair_at(phase, s, a)]
    }

    /// Transition row `p_n(. | s, a)`, `phase` 1-based.
    pub fn kernel(&self, phase: usize, s: usize, a: usize) -> &[f64] {
        let i = self.pair_at(phase, s, a) * self.shape.states;
        &self.kernels[i..i + self.shape.states]
    }

    fn pair_at(&self, phase: usize, s: usize, a: usize) -> usize {
        assert!((1..=self.shape.period).contains(&phase), "phase out of range");
        self.shape
            .pair(self.shape.aug_index(s, phase - 1), a)
    }

    pub fn tables(&self) -> PmdpTables {
        PmdpTables {
            states: self.shape.states,
            actions: self.shape.actions,
            period: self.shape.period,
            rewards: self.rewards.clone(),
            kernels: self.kernels.clone(),
        }
    }

    /// Parses the text format written by [`PmdpSpec::to_text`].
    ///
    /// Header `S A N`, then for each phase an `S x A` reward matrix followed
    /// by `A` transition matrices of shape `S x S` (one row per line).
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (line, header) = lines.next().ok_or(ModelError::Parse {
            line: 1,
            message: "missing `S A N` header".into(),
        })?;
        let dims = parse_numbers::<usize>(line, header)?;
        let [states, actions, period] = dims[..] else {
            return Err(ModelError::Parse {
                line,
                message: format!("header needs 3 integers, found {}", dims.len()),
            });
        };

        let mut rewards = vec![0.0; states * actions * period];
        let mut kernels = vec![0.0; states * states * actions * period];
        let last_line = text.lines().count();
        let mut next_row = |width: usize, what: &str| -> Result<(usize, Vec<f64>), ModelError> {
            let (line, content) = lines.next().ok_or_else(|| ModelError::Parse {
                line: last_line,
                message: format!("unexpected end of file while reading {what}"),
            })?;
            let row = parse_numbers::<f64>(line, content)?;
            if row.len() != width {
                return Err(ModelError::Parse {
                    line,
                    message: format!("{what}: expected {width} values, found {}", row.len()),
                });
            }
            Ok((line, row))
        };

        let mut row_lines = vec![0; states * actions * period];
        for p in 0..period {
            for s in 0..states {
                let (_, row) = next_row(actions, "reward row")?;
                for (a, r) in row.into_iter().enumerate() {
                    rewards[(p * states + s) * actions + a] = r;
                }
            }
            for a in 0..actions {
                for s in 0..states {
                    let (line, row) = next_row(states, "transition row")?;
                    let pair = (p * states + s) * actions + a;
                    kernels[pair * states..(pair + 1) * states].copy_from_slice(&row);
                    row_lines[pair] = line;
                }
            }
        }
        if let Some((line, _)) = lines.next() {
            return Err(ModelError::Parse {
                line,
                message: "trailing content after the last phase block".into(),
            });
        }
        validate_pmdp(PmdpTables {
            states,
            actions,
            period,
            rewards,
            kernels,
        })
        .map_err(|e| match e {
            ModelError::RowSum {
                phase,
                state,
                action,
                ..
            }
            | ModelError::NegativeProbability {
                phase,
                state,
                action,
                ..
            } => {
                let shape = Shape::new(states, actions, period);
                let line = row_lines[shape.pair(shape.aug_index(state, phase - 1), action)];
                ModelError::Parse {
                    line,
                    message: e.to_string(),
                }
            }
            other => other,
        })
    }

    /// Canonical text serialization; `parse(to_text())` round-trips exactly.
    pub fn to_text(&self) -> String {
        let Shape {
            states,
            actions,
            period,
        } = self.shape;
        let mut out = format!("{states} {actions} {period}\n");
        for phase in 1..=period {
            let _ = writeln!(out, "# phase {phase}: rewards");
            for s in 0..states {
                let row: Vec<String> = (0..actions)
                    .map(|a| format!("{:?}", self.reward(phase, s, a)))
                    .collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
            for a in 0..actions {
                let _ = writeln!(out, "# phase {phase}: transitions for action {a}");
                for s in 0..states {
                    let row: Vec<String> =
                        self.kernel(phase, s, a).iter().map(|p| format!("{p:?}")).collect();
                    let _ = writeln!(out, "{}", row.join(" "));
                }
            }
        }
        out
    }
}

fn parse_numbers<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>, ModelError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|_| ModelError::Parse {
                line,
                message: format!("cannot parse `{tok}`"),
            })
        })
        .collect()
}

/// Stationary augmented MDP.
///
/// Pair `((s, n), a)` moves to `(s', succ(n))` with probability `row(x, a)[s']`
/// and to every other augmented state with probability zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amdp {
    shape: Shape,
    rewards: Vec<f64>,
    rows: Vec<f64>,
}

/// Augments a periodic MDP with its phase.
pub fn augment(spec: &PmdpSpec) -> Amdp {
    // Both layouts are [phase_idx][s][a](...), so augmentation is a relabelling.
    Amdp {
        shape: spec.shape,
        rewards: spec.rewards.clone(),
        rows: spec.kernels.clone(),
    }
}

impl Amdp {
    /// Builds an augmented model directly from pair-indexed tables.
    ///
    /// Unlike [`PmdpSpec`], a period of 1 is accepted: that is the stationary
    /// model a phase-blind learner works with.
    pub fn from_tables(shape: Shape, rewards: Vec<f64>, mut rows: Vec<f64>) -> Result<Self, ModelError> {
        if shape.states == 0 || shape.actions == 0 || shape.period == 0 {
            return Err(ModelError::EmptyDimension);
        }
        check_len("rewards", shape.pairs(), rewards.len())?;
        check_len("rows", shape.pairs() * shape.states, rows.len())?;
        for (pair, &r) in rewards.iter().enumerate() {
            if !(0.0..=1.0).contains(&r) {
                let (phase, state, action) = locate(&shape, pair);
                return Err(ModelError::RewardRange {
                    phase,
                    state,
                    action,
                    value: r,
                });
            }
        }
        for (pair, row) in rows.chunks_mut(shape.states).enumerate() {
            let (phase, state, action) = locate(&shape, pair);
            normalize_row(row).map_err(|e| match e {
                RowDefect::Negative(next) => ModelError::NegativeProbability {
                    phase,
                    state,
                    action,
                    next,
                },
                RowDefect::Sum(sum) => ModelError::RowSum {
                    phase,
                    state,
                    action,
                    sum,
                },
            })?;
        }
        Ok(Self {
            shape,
            rewards,
            rows,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn reward(&self, x: usize, a: usize) -> f64 {
        self.rewards[self.shape.pair(x, a)]
    }

    /// Distribution over successor original states of pair `(x, a)`.
    pub fn row(&self, x: usize, a: usize) -> &[f64] {
        let i = self.shape.pair(x, a) * self.shape.states;
        &self.rows[i..i + self.shape.states]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    /// Successor distribution of `(x, a)` over all `S * N` augmented states.
    pub fn full_row(&self, x: usize, a: usize) -> Vec<f64> {
        let (_, phase_idx) = self.shape.split(x);
        let next = self.shape.next_phase_idx(phase_idx);
        let mut full = vec![0.0; self.shape.aug_states()];
        for (s_next, &p) in self.row(x, a).iter().enumerate() {
            full[self.shape.aug_index(s_next, next)] += p;
        }
        full
    }

    /// Reads the phase tables back out. Fails for period-1 models.
    pub fn to_spec(&self) -> Result<PmdpSpec, ModelError> {
        validate_pmdp(PmdpTables {
            states: self.shape.states,
            actions: self.shape.actions,
            period: self.shape.period,
            rewards: self.rewards.clone(),
            kernels: self.rows.clone(),
        })
    }

    /// Number of nonzero successor probabilities of each pair.
    pub fn support_sizes(&self) -> Vec<usize> {
        self.rows
            .chunks(self.shape.states)
            .map(|row| row.iter().filter(|&&p| p > 0.0).count())
            .collect()
    }
}

/// Deterministic stationary policy over augmented states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Policy {
    shape: Shape,
    actions: Vec<usize>,
}

impl Policy {
    pub fn new(shape: Shape, actions: Vec<usize>) -> Result<Self, ModelError> {
        check_len("policy", shape.aug_states(), actions.len())?;
        if let Some(x) = actions.iter().position(|&a| a >= shape.actions) {
            return Err(ModelError::ActionRange {
                state: x,
                action: actions[x],
            });
        }
        Ok(Self { shape, actions })
    }

    /// Policy that plays `a` everywhere.
    pub fn constant(shape: Shape, a: usize) -> Result<Self, ModelError> {
        Self::new(shape, vec![a; shape.aug_states()])
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Action at augmented index `x`.
    pub fn action(&self, x: usize) -> usize {
        self.actions[x]
    }

    /// Action at original state `s` and 1-based `phase`.
    pub fn action_at(&self, s: usize, phase: usize) -> usize {
        self.actions[self.shape.aug_index(s, phase - 1)]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.actions
    }
}
