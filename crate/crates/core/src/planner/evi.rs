//! Average-reward value iteration with an aperiodicity transform.
//!
//! Each backup mixes the usual Bellman update with a `(1 - tau)` self-loop:
//!
//! ```text
//! u'(x) = max_a { r(x, a) + tau * sum_y p(y | x, a) u(y) + (1 - tau) * u(x) }
//! ```
//!
//! The transformed model has the same gain as the original for every
//! stationary policy but is aperiodic, so the span of `u' - u` shrinks to zero
//! even though every augmented model is periodic by construction. Values are
//! recentred on augmented state 0 (first state, phase 1) after each sweep.

use serde::{Deserialize, Serialize};

use super::confidence::ConfidenceSet;
use super::inner::{box_into, l1_into, sort_descending};
use crate::error::PlanError;
use crate::model::{Amdp, Policy, Shape};

pub const DEFAULT_TAU: f64 = 0.9;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EviOptions {
    /// Stop once `span(u_{i+1} - u_i) <= epsilon`.
    pub epsilon: f64,
    /// Aperiodicity coefficient, in `(0, 1)`.
    pub tau: f64,
    pub max_iter: usize,
}

impl EviOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            tau: DEFAULT_TAU,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn check(&self) -> Result<(), PlanError> {
        if !(self.epsilon > 0.0) {
            return Err(PlanError::InvalidInput(format!("epsilon {} must be positive", self.epsilon)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(PlanError::InvalidInput(format!("tau {} outside (0, 1)", self.tau)));
        }
        Ok(())
    }
}

/// Output of optimistic planning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub policy: Policy,
    /// Optimistic gain estimate.
    pub gain: f64,
    /// The maximizing rewards and transition rows at termination.
    pub model: Amdp,
    pub iterations: usize,
}

/// Output of plain value iteration on a point model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainEstimate {
    pub gain: f64,
    pub policy: Policy,
    /// Relative values of the transformed model at termination.
    pub bias: Vec<f64>,
    pub iterations: usize,
}

struct Converged {
    /// Values the final backup was computed from.
    u: Vec<f64>,
    policy: Vec<usize>,
    gain: f64,
    iterations: usize,
}

/// Shared relative value iteration loop.
///
/// `backup(pair, u_next, order)` returns the best reward of the pair and the
/// best expected successor value, where `u_next` holds the values of the
/// successor phase and `order` sorts it in decreasing order.
fn relative_vi<B>(shape: Shape, opts: &EviOptions, mut backup: B) -> Result<Converged, PlanError>
where
    B: FnMut(usize, &[f64], &[usize]) -> (f64, f64),
{
    opts.check()?;
    let (ns, na) = (shape.states, shape.actions);
    let m = shape.aug_states();
    let mut u = vec![0.0; m];
    let mut next = vec![0.0; m];
    let mut policy = vec![0usize; m];
    let mut order = vec![0usize; m];
    let tau = opts.tau;

    for iter in 1..=opts.max_iter {
        for (vals, ord) in u.chunks(ns).zip(order.chunks_mut(ns)) {
            sort_descending(vals, ord);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in 0..m {
            let (_, phase_idx) = shape.split(x);
            let np = shape.next_phase_idx(phase_idx);
            let u_next = &u[np * ns..(np + 1) * ns];
            let ord = &order[np * ns..(np + 1) * ns];
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a in 0..na {
                let (r, ev) = backup(x * na + a, u_next, ord);
                let v = r + tau * ev;
                if v > best {
                    best = v;
                    best_a = a;
                }
            }
            let value = best + (1.0 - tau) * u[x];
            next[x] = value;
            policy[x] = best_a;
            let d = value - u[x];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(PlanError::InvalidInput("value iteration produced non-finite values".into()));
        }
        let span = hi - lo;
        let gain = 0.5 * (hi + lo);
        if span <= opts.epsilon {
            return Ok(Converged {
                u,
                policy,
                gain,
                iterations: iter,
            });
        }
        if iter == opts.max_iter {
            return Err(PlanError::NotConverged {
                iterations: iter,
                span,
                last_gain: gain,
            });
        }
        let reference = next[0];
        next.iter_mut().for_each(|v| *v -= reference);
        std::mem::swap(&mut u, &mut next);
    }
    Err(PlanError::InvalidInput("max_iter must be positive".into()))
}

/// Optimistic planning over a confidence set.
///
/// Returns the greedy policy of the last backup, the midpoint gain estimate
/// and the maximizing model. When the true model lies in `set`, the returned
/// gain is at least the optimal gain minus `epsilon`.
pub fn modified_evi(set: &ConfidenceSet, opts: EviOptions) -> Result<PlanResult, PlanError> {
    let shape = set.shape();
    let ns = shape.states;
    let mut scratch = vec![0.0; ns];
    let done = match set {
        ConfidenceSet::L1(l1) => relative_vi(shape, &opts, |pair, u_next, ord| {
            l1_into(l1.center(pair), l1.radius(pair), ord, &mut scratch);
            (set.reward_bounds(pair).1, dot(&scratch, u_next))
        })?,
        ConfidenceSet::Box(bx) => relative_vi(shape, &opts, |pair, u_next, ord| {
            box_into(bx.lo(pair), bx.hi(pair), ord, &mut scratch);
            (set.reward_bounds(pair).1, dot(&scratch, u_next))
        })?,
    };

    // Materialize the maximizing model from the values of the last backup.
    let mut rewards = Vec::with_capacity(shape.pairs());
    let mut rows = vec![0.0; shape.pairs() * ns];
    let mut order = vec![0usize; ns];
    for x in 0..shape.aug_states() {
        let (_, phase_idx) = shape.split(x);
        let np = shape.next_phase_idx(phase_idx);
        sort_descending(&done.u[np * ns..(np + 1) * ns], &mut order);
        for a in 0..shape.actions {
            let pair = shape.pair(x, a);
            let out = &mut rows[pair * ns..(pair + 1) * ns];
            match set {
                ConfidenceSet::L1(l1) => l1_into(l1.center(pair), l1.radius(pair), &order, out),
                ConfidenceSet::Box(bx) => box_into(bx.lo(pair), bx.hi(pair), &order, out),
            }
            rewards.push(set.reward_bounds(pair).1);
        }
    }
    let model = Amdp::from_tables(shape, rewards, rows)
        .map_err(|e| PlanError::InvalidInput(format!("optimistic model: {e}")))?;
    let policy = Policy::new(shape, done.policy).expect("greedy policy is total");
    Ok(PlanResult {
        policy,
        gain: done.gain.clamp(0.0, 1.0),
        model,
        iterations: done.iterations,
    })
}

/// Average-reward value iteration on a point model.
pub fn value_iteration(model: &Amdp, opts: EviOptions) -> Result<GainEstimate, PlanError> {
    let shape = model.shape();
    let done = relative_vi(shape, &opts, |pair, u_next, _| {
        let row = &model.rows()[pair * shape.states..(pair + 1) * shape.states];
        (model.rewards()[pair], dot(row, u_next))
    })?;
    Ok(GainEstimate {
        gain: done.gain,
        policy: Policy::new(shape, done.policy).expect("greedy policy is total"),
        bias: done.u,
        iterations: done.iterations,
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
