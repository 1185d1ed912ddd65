//! Independent reference implementations used as test oracles. They work
//! from the periodic spec directly and share no code with the planner.

#![allow(dead_code, clippy::needless_range_loop, clippy::too_many_arguments)]

use periodic_rl::PmdpSpec;

/// Dense linear solve by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Chain over `(phase, state)` pairs, index `(phase - 1) * S + s`, under a
/// deterministic policy given per index.
pub fn policy_chain(spec: &PmdpSpec, actions: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (ns, np) = (spec.states(), spec.period());
    let m = ns * np;
    let mut p = vec![vec![0.0; m]; m];
    let mut r = vec![0.0; m];
    for phase in 1..=np {
        let next = if phase == np { 1 } else { phase + 1 };
        for s in 0..ns {
            let i = (phase - 1) * ns + s;
            let a = actions[i];
            r[i] = spec.reward(phase, s, a);
            for (s2, &q) in spec.kernel(phase, s, a).iter().enumerate() {
                p[i][(next - 1) * ns + s2] += q;
            }
        }
    }
    (p, r)
}

/// Gain of an irreducible chain via its stationary distribution.
pub fn irreducible_gain(p: &[Vec<f64>], r: &[f64]) -> f64 {
    let m = r.len();
    // Solve pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            a[j][i] = p[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[m - 1] = vec![1.0; m];
    let mut b = vec![0.0; m];
    b[m - 1] = 1.0;
    let pi = solve(a, b);
    pi.iter().zip(r).map(|(x, y)| x * y).sum()
}

/// Applies `P' = tau P + (1 - tau) I`.
pub fn lazy(p: &[Vec<f64>], tau: f64) -> Vec<Vec<f64>> {
    p.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &q)| tau * q + if i == j { 1.0 - tau } else { 0.0 })
                .collect()
        })
        .collect()
}

/// All `A^(S N)` deterministic policies, index-major.
pub fn all_policies(spec: &PmdpSpec) -> Vec<Vec<usize>> {
    let m = spec.states() * spec.period();
    let a = spec.actions();
    let count = a.pow(m as u32);
    (0..count)
        .map(|mut code| {
            (0..m)
                .map(|_| {
                    let v = code % a;
                    code /= a;
                    v
                })
                .collect()
        })
        .collect()
}

/// Best gain over all deterministic policies; requires every policy's chain
/// to be irreducible (positive kernels).
pub fn brute_force_optimum(spec: &PmdpSpec) -> f64 {
    all_policies(spec)
        .iter()
        .map(|pol| {
            let (p, r) = policy_chain(spec, pol);
            irreducible_gain(&p, &r)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Best `p . u` over grid points of the simplex (multiples of `1 / steps`)
/// within L1 distance `radius` of `p_hat`.
pub fn grid_l1_max(p_hat: &[f64], radius: f64, u: &[f64], steps: usize) -> f64 {
    let n = p_hat.len();
    let h = 1.0 / steps as f64;
    let mut best = f64::NEG_INFINITY;
    let mut counts = vec![0usize; n];
    // Enumerate compositions of `steps` into n parts, pruning on the L1 budget.
    fn rec(
        i: usize,
        left: usize,
        used: f64,
        counts: &mut [usize],
        p_hat: &[f64],
        radius: f64,
        u: &[f64],
        h: f64,
        best: &mut f64,
    ) {
        let n = counts.len();
        if used > radius + 1e-12 {
            return;
        }
        if i == n - 1 {
            counts[i] = left;
            let d = used + (left as f64 * h - p_hat[i]).abs();
            if d <= radius + 1e-12 {
                let v: f64 = counts.iter().zip(u).map(|(&c, &w)| c as f64 * h * w).sum();
                if v > *best {
                    *best = v;
                }
            }
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            let d = (c as f64 * h - p_hat[i]).abs();
            rec(i + 1, left - c, used + d, counts, p_hat, radius, u, h, best);
        }
    }
    rec(0, steps, 0.0, &mut counts, p_hat, radius, u, h, &mut best);
    best
}

/// Best `p . u` over vertices of `{lo <= p <= hi, sum p = 1}`: every vertex
/// has all coordinates but one at a bound.
pub fn vertex_box_max(lo: &[f64], hi: &[f64], u: &[f64]) -> f64 {
    let n = lo.len();
    let mut best = f64::NEG_INFINITY;
    for free in 0..n {
        for mask in 0u32..(1 << (n - 1)) {
            let mut p = vec![0.0; n];
            let mut bit = 0;
            for j in 0..n {
                if j == free {
                    continue;
                }
                p[j] = if mask >> bit & 1 == 1 { hi[j] } else { lo[j] };
                bit += 1;
            }
            let rest = 1.0 - p.iter().sum::<f64>();
            if rest >= lo[free] - 1e-12 && rest <= hi[free] + 1e-12 {
                p[free] = rest;
                best = best.max(dot(&p, u));
            }
        }
    }
    best
}

/// Row sum and L1 distance helpers.
pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn value(p: &[f64], u: &[f64]) -> f64 {
    dot(p, u)
}
