use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::model::{Amdp, Shape};

/// Slack allowed when testing model membership.
const MEMBERSHIP_TOL: f64 = 1e-12;

/// Which family a confidence set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetKind {
    /// L1 ball around each empirical transition row.
    L1,
    /// Per-entry intervals around each empirical transition probability.
    Box,
}

/// Plausible models around empirical estimates, one constraint per
/// augmented pair. All tables are indexed by pair, rows by `[pair][s']`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConfidenceSet {
    L1(L1Set),
    Box(BoxSet),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Set {
    shape: Shape,
    center: Vec<f64>,
    radius: Vec<f64>,
    reward_lo: Vec<f64>,
    reward_hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSet {
    shape: Shape,
    lo: Vec<f64>,
    hi: Vec<f64>,
    reward_lo: Vec<f64>,
    reward_hi: Vec<f64>,
}

fn check_rewards(shape: &Shape, lo: &[f64], hi: &[f64]) -> Result<(), PlanError> {
    if lo.len() != shape.pairs() || hi.len() != shape.pairs() {
        return Err(PlanError::InvalidInput("reward interval tables have the wrong size".into()));
    }
    if let Some(i) = (0..lo.len()).find(|&i| !(0.0 <= lo[i] && lo[i] <= hi[i] && hi[i] <= 1.0)) {
        return Err(PlanError::InvalidInput(format!(
            "reward interval [{}, {}] of pair {i} is not inside [0, 1]",
            lo[i], hi[i]
        )));
    }
    Ok(())
}

impl L1Set {
    /// Builds an L1 set. Radii above 2 are capped at 2.
    pub fn new(
        shape: Shape,
        center: Vec<f64>,
        mut radius: Vec<f64>,
        reward_lo: Vec<f64>,
        reward_hi: Vec<f64>,
    ) -> Result<Self, PlanError> {
        if center.len() != shape.pairs() * shape.states || radius.len() != shape.pairs() {
            return Err(PlanError::InvalidInput("L1 set tables have the wrong size".into()));
        }
        for (pair, row) in center.chunks(shape.states).enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(PlanError::NotADistribution(format!("center row of pair {pair}: {row:?}")));
            }
        }
        for r in radius.iter_mut() {
            if !(*r >= 0.0) {
                return Err(PlanError::InvalidInput(format!("negative L1 radius {r}")));
            }
            *r = r.min(2.0);
        }
        check_rewards(&shape, &reward_lo, &reward_hi)?;
        Ok(Self {
            shape,
            center,
            radius,
            reward_lo,
            reward_hi,
        })
    }

    pub fn center(&self, pair: usize) -> &[f64] {
        &self.center[pair * self.shape.states..(pair + 1) * self.shape.states]
    }

    pub fn radius(&self, pair: usize) -> f64 {
        self.radius[pair]
    }
}

impl BoxSet {
    /// Builds a box set; bounds are intersected with `[0, 1]`.
    ///
    /// Fails when some row admits no distribution.
    pub fn new(
        shape: Shape,
        mut lo: Vec<f64>,
        mut hi: Vec<f64>,
        reward_lo: Vec<f64>,
        reward_hi: Vec<f64>,
    ) -> Result<Self, PlanError> {
        let len = shape.pairs() * shape.states;
        if lo.len() != len || hi.len() != len {
            return Err(PlanError::InvalidInput("box tables have the wrong size".into()));
        }
        for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
            *l = l.clamp(0.0, 1.0);
            *h = h.clamp(0.0, 1.0);
            if !(*l <= *h) {
                return Err(PlanError::InvalidInput(format!("box interval [{l}, {h}] is inverted")));
            }
        }
        for (lr, hr) in lo.chunks(shape.states).zip(hi.chunks(shape.states)) {
            let lo_sum: f64 = lr.iter().sum();
            let hi_sum: f64 = hr.iter().sum();
            if lo_sum > 1.0 + 1e-9 || hi_sum < 1.0 - 1e-9 {
                return Err(PlanError::EmptySet { lo_sum, hi_sum });
            }
        }
        check_rewards(&shape, &reward_lo, &reward_hi)?;
        Ok(Self {
            shape,
            lo,
            hi,
            reward_lo,
            reward_hi,
        })
    }

    pub fn lo(&self, pair: usize) -> &[f64] {
        &self.lo[pair * self.shape.states..(pair + 1) * self.shape.states]
    }

    pub fn hi(&self, pair: usize) -> &[f64] {
        &self.hi[pair * self.shape.states..(pair + 1) * self.shape.states]
    }
}

impl ConfidenceSet {
    /// L1 set of radius zero around a known model.
    pub fn singleton(model: &Amdp) -> Self {
        let shape = model.shape();
        ConfidenceSet::L1(L1Set {
            shape,
            center: model.rows().to_vec(),
            radius: vec![0.0; shape.pairs()],
            reward_lo: model.rewards().to_vec(),
            reward_hi: model.rewards().to_vec(),
        })
    }

    /// Box set collapsed onto a known model.
    pub fn singleton_box(model: &Amdp) -> Self {
        ConfidenceSet::Box(BoxSet {
            shape: model.shape(),
            lo: model.rows().to_vec(),
            hi: model.rows().to_vec(),
            reward_lo: model.rewards().to_vec(),
            reward_hi: model.rewards().to_vec(),
        })
    }

    pub fn kind(&self) -> SetKind {
        match self {
            ConfidenceSet::L1(_) => SetKind::L1,
            ConfidenceSet::Box(_) => SetKind::Box,
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            ConfidenceSet::L1(s) => s.shape,
            ConfidenceSet::Box(s) => s.shape,
        }
    }

    /// Reward interval of a pair.
    pub fn reward_bounds(&self, pair: usize) -> (f64, f64) {
        match self {
            ConfidenceSet::L1(s) => (s.reward_lo[pair], s.reward_hi[pair]),
            ConfidenceSet::Box(s) => (s.reward_lo[pair], s.reward_hi[pair]),
        }
    }

    /// Whether `model` satisfies every constraint of the set.
    pub fn contains(&self, model: &Amdp) -> bool {
        let shape = self.shape();
        if model.shape() != shape {
            return false;
        }
        let rewards_ok = (0..shape.pairs()).all(|pair| {
            let (lo, hi) = self.reward_bounds(pair);
            let r = model.rewards()[pair];
            r >= lo - MEMBERSHIP_TOL && r <= hi + MEMBERSHIP_TOL
        });
        if !rewards_ok {
            return false;
        }
        let rows = model.rows().chunks(shape.states).enumerate();
        match self {
            ConfidenceSet::L1(set) => rows.into_iter().all(|(pair, row)| {
                let dist: f64 = row
                    .iter()
                    .zip(set.center(pair))
                    .map(|(p, c)| (p - c).abs())
                    .sum();
                dist <= set.radius(pair) + MEMBERSHIP_TOL
            }),
            ConfidenceSet::Box(set) => rows.into_iter().all(|(pair, row)| {
                row.iter()
                    .zip(set.lo(pair).iter().zip(set.hi(pair)))
                    .all(|(p, (l, h))| *p >= l - MEMBERSHIP_TOL && *p <= h + MEMBERSHIP_TOL)
            }),
        }
    }
}
