use crate::model::Amdp;

const TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 10_000_000;

/// Diameter of an augmented model: the largest, over ordered pairs of
/// distinct augmented states, of the smallest expected hitting time any
/// stationary policy achieves.
///
/// Returns `None` when some state cannot reach some other state under any
/// policy.
pub fn diameter(model: &Amdp) -> Option<f64> {
    let shape = model.shape();
    let m = shape.aug_states();
    if !strongly_connected(model) {
        return None;
    }
    let mut worst: f64 = 0.0;
    let mut h = vec![0.0; m];
    for target in 0..m {
        h.iter_mut().for_each(|v| *v = 0.0);
        hitting_times(model, target, &mut h);
        worst = h.iter().copied().fold(worst, f64::max);
    }
    Some(worst)
}

/// Minimal expected hitting times of `target` by Gauss-Seidel value
/// iteration on the stochastic shortest path problem with `target` absorbing.
pub fn hitting_times(model: &Amdp, target: usize, h: &mut [f64]) {
    let shape = model.shape();
    let ns = shape.states;
    for _ in 0..MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for x in 0..shape.aug_states() {
            if x == target {
                continue;
            }
            let (_, phase_idx) = shape.split(x);
            let base = shape.next_phase_idx(phase_idx) * ns;
            let best = (0..shape.actions)
                .map(|a| {
                    model
                        .row(x, a)
                        .iter()
                        .enumerate()
                        .map(|(s, p)| p * h[base + s])
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            let value = 1.0 + best;
            change = change.max((value - h[x]).abs());
            h[x] = value;
        }
        if change <= TOL {
            return;
        }
    }
}

/// Every augmented state reaches every other along positive-probability
/// transitions of some action.
fn strongly_connected(model: &Amdp) -> bool {
    let shape = model.shape();
    let m = shape.aug_states();
    let successors = |x: usize| -> Vec<usize> {
        let (_, phase_idx) = shape.split(x);
        let np = shape.next_phase_idx(phase_idx);
        let mut out: Vec<usize> = (0..shape.actions)
            .flat_map(|a| {
                model
                    .row(x, a)
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(s, _)| shape.aug_index(s, np))
                    .collect::<Vec<_>>()
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let adjacency: Vec<Vec<usize>> = (0..m).map(successors).collect();
    let mut reverse = vec![Vec::new(); m];
    for (x, succ) in adjacency.iter().enumerate() {
        for &y in succ {
            reverse[y].push(x);
        }
    }
    reaches_all(&adjacency) && reaches_all(&reverse)
}

fn reaches_all(adjacency: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adjacency.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &adjacency[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|s| s)
}
