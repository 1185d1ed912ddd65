//! Exact evaluation of stationary policies on small augmented models.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::evi::{value_iteration, EviOptions, GainEstimate};
use crate::error::PlanError;
use crate::model::{Amdp, Policy, Shape};

/// Markov chain induced by a policy, as a dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    size: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
}

/// Gain of a policy from the designated start state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyGain {
    pub gain: f64,
    /// More than one closed class exists.
    pub multichain: bool,
    pub closed_classes: usize,
}

/// Chain over the `S * N` augmented states obtained by fixing `policy`.
pub fn induced_chain(model: &Amdp, policy: &Policy) -> Chain {
    let shape = model.shape();
    assert_eq!(shape, policy.shape(), "policy and model shapes differ");
    let m = shape.aug_states();
    let mut transition = vec![0.0; m * m];
    let mut reward = vec![0.0; m];
    for x in 0..m {
        let a = policy.action(x);
        reward[x] = model.reward(x, a);
        let full = model.full_row(x, a);
        transition[x * m..(x + 1) * m].copy_from_slice(&full);
    }
    Chain {
        size: m,
        transition,
        reward,
    }
}

impl Chain {
    pub fn new(size: usize, transition: Vec<f64>, reward: Vec<f64>) -> Self {
        assert_eq!(transition.len(), size * size);
        assert_eq!(reward.len(), size);
        Self {
            size,
            transition,
            reward,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn p(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.size + to]
    }

    pub fn reward(&self) -> &[f64] {
        &self.reward
    }

    /// Mixes every row with a `(1 - tau)` self-loop.
    pub fn aperiodic(&self, tau: f64) -> Chain {
        let m = self.size;
        let mut transition: Vec<f64> = self.transition.iter().map(|p| tau * p).collect();
        for x in 0..m {
            transition[x * m + x] += 1.0 - tau;
        }
        Chain {
            size: m,
            transition,
            reward: self.reward.clone(),
        }
    }

    /// Cesàro-limit average reward starting from `start`.
    ///
    /// Each closed class gets its stationary distribution; the gain from
    /// `start` weights class gains by absorption probabilities.
    pub fn gain_from(&self, start: usize) -> PolicyGain {
        let m = self.size;
        let mut graph = DiGraph::<(), ()>::with_capacity(m, m * 2);
        let nodes: Vec<_> = (0..m).map(|_| graph.add_node(())).collect();
        for x in 0..m {
            for y in 0..m {
                if self.p(x, y) > 0.0 {
                    graph.add_edge(nodes[x], nodes[y], ());
                }
            }
        }
        let mut class_of = vec![usize::MAX; m];
        let mut class_gain = Vec::new();
        for comp in tarjan_scc(&graph) {
            let members: Vec<usize> = comp.iter().map(|n| n.index()).collect();
            let closed = members
                .iter()
                .all(|&x| (0..m).all(|y| self.p(x, y) == 0.0 || members.contains(&y)));
            if closed {
                let id = class_gain.len();
                class_gain.push(self.class_gain(&members));
                members.iter().for_each(|&x| class_of[x] = id);
            }
        }
        let closed_classes = class_gain.len();
        let gain = if class_of[start] != usize::MAX {
            class_gain[class_of[start]]
        } else {
            self.transient_gain(start, &class_of, &class_gain)
        };
        PolicyGain {
            gain,
            multichain: closed_classes > 1,
            closed_classes,
        }
    }

    /// `pi . r` for the stationary distribution of a closed class.
    fn class_gain(&self, members: &[usize]) -> f64 {
        let c = members.len();
        // Solve pi (P - I) = 0 with sum(pi) = 1, replacing the last balance
        // equation by the normalization.
        let mut a = DMatrix::<f64>::zeros(c, c);
        for (i, &x) in members.iter().enumerate() {
            for (j, &y) in members.iter().enumerate() {
                a[(j, i)] = self.p(x, y) - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..c {
            a[(c - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(c);
        b[c - 1] = 1.0;
        let pi = a.lu().solve(&b).expect("closed class has a unique stationary distribution");
        members.iter().enumerate().map(|(i, &x)| pi[i] * self.reward[x]).sum()
    }

    /// Expected eventual class gain from a transient start state.
    fn transient_gain(&self, start: usize, class_of: &[usize], class_gain: &[f64]) -> f64 {
        let transient: Vec<usize> = (0..self.size).filter(|&x| class_of[x] == usize::MAX).collect();
        let t = transient.len();
        let mut a = DMatrix::<f64>::identity(t, t);
        let mut b = DVector::<f64>::zeros(t);
        for (i, &x) in transient.iter().enumerate() {
            for (j, &y) in transient.iter().enumerate() {
                a[(i, j)] -= self.p(x, y);
            }
            b[i] = (0..self.size)
                .filter(|&y| class_of[y] != usize::MAX)
                .map(|y| self.p(x, y) * class_gain[class_of[y]])
                .sum();
        }
        let h = a.lu().solve(&b).expect("transient states leave with probability one");
        h[transient.iter().position(|&x| x == start).expect("start is transient")]
    }
}

/// Exact gain of `policy` from augmented state `(s_1, 1)`.
pub fn policy_avg_reward(model: &Amdp, policy: &Policy) -> PolicyGain {
    induced_chain(model, policy).gain_from(0)
}

/// Optimal gain by value iteration at tolerance `1e-9`.
pub fn optimal_avg_reward(model: &Amdp) -> Result<GainEstimate, PlanError> {
    value_iteration(model, EviOptions::new(1e-9))
}

/// Largest policy space [`enumerate_optimal`] is willing to scan.
pub const MAX_ENUMERATED_POLICIES: u64 = 1 << 20;

/// Best deterministic policy by exhaustive enumeration, for small models.
///
/// Returns `None` when `A^(S N)` exceeds [`MAX_ENUMERATED_POLICIES`].
pub fn enumerate_optimal(model: &Amdp) -> Option<(f64, Policy)> {
    let shape = model.shape();
    let count = (shape.actions as u64).checked_pow(shape.aug_states() as u32)?;
    if count > MAX_ENUMERATED_POLICIES {
        return None;
    }
    let mut best: Option<(f64, Policy)> = None;
    for code in 0..count {
        let policy = decode_policy(shape, code);
        let gain = policy_avg_reward(model, &policy).gain;
        if best.as_ref().is_none_or(|(g, _)| gain > *g) {
            best = Some((gain, policy));
        }
    }
    best
}

/// The `code`-th deterministic policy in mixed-radix order.
pub fn decode_policy(shape: Shape, mut code: u64) -> Policy {
    let actions = (0..shape.aug_states())
        .map(|_| {
            let a = (code % shape.actions as u64) as usize;
            code /= shape.actions as u64;
            a
        })
        .collect();
    Policy::new(shape, actions).expect("decoded actions are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{augment, PmdpSpec};

    #[test]
    fn two_cycle() {
        let model = augment(&PmdpSpec::from_fn(1, 1, 2, |n, _, _| [0.2, 0.8][n - 1], |_, _, _, _| 1.0).unwrap());
        let g = policy_avg_reward(&model, &Policy::constant(model.shape(), 0).unwrap());
        assert!((g.gain - 0.5).abs() < 1e-12);
        assert!(!g.multichain);
    }

    #[test]
    fn absorbing_cycle_with_constant_reward() {
        // State 1 is absorbing with reward 0.35 at both phases; state 0 leaks into it.
        let spec = PmdpSpec::from_fn(
            2,
            1,
            2,
            |_, s, _| if s == 1 { 0.35 } else { 0.9 },
            |_, s, _, next| match (s, next) {
                (0, 0) => 0.5,
                (0, 1) => 0.5,
                (1, 1) => 1.0,
                _ => 0.0,
            },
        )
        .unwrap();
        let model = augment(&spec);
        let g = policy_avg_reward(&model, &Policy::constant(model.shape(), 0).unwrap());
        assert!((g.gain - 0.35).abs() < 1e-12);
        assert_eq!(g.closed_classes, 1);
    }

    #[test]
    fn multichain_weights_classes_by_absorption() {
        // From state 0 the chain falls into state 1 (reward 1) or state 2
        // (reward 0) with equal probability.
        let spec = PmdpSpec::from_fn(
            3,
            1,
            2,
            |_, s, _| if s == 1 { 1.0 } else { 0.0 },
            |_, s, _, next| match (s, next) {
                (0, 1) | (0, 2) => 0.5,
                (1, 1) | (2, 2) => 1.0,
                _ => 0.0,
            },
        )
        .unwrap();
        let model = augment(&spec);
        let g = policy_avg_reward(&model, &Policy::constant(model.shape(), 0).unwrap());
        assert!(g.multichain);
        assert_eq!(g.closed_classes, 2);
        assert!((g.gain - 0.5).abs() < 1e-12);
    }

    #[test]
    fn decode_covers_all_policies() {
        let shape = Shape::new(1, 3, 2);
        let all: std::collections::HashSet<_> = (0..9).map(|c| decode_policy(shape, c)).collect();
        assert_eq!(all.len(), 9);
    }
}
