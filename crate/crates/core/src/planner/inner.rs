//! Inner maximizations of extended value iteration.
//!
//! Both routines maximize `sum_j p[j] * u[j]` over a polytope of
//! distributions. Each takes the successor values' descending order so that
//! one sort per phase can be shared across all pairs of an iteration.

use crate::error::PlanError;

const DIST_TOL: f64 = 1e-9;

/// Indices of `u` sorted by decreasing value; ties keep index order.
pub fn descending_order(u: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    sort_descending(u, &mut order);
    order
}

pub(crate) fn sort_descending(u: &[f64], order: &mut [usize]) {
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    // Rows are short, so insertion sort beats the general-purpose sort here.
    for i in 1..order.len() {
        let mut j = i;
        while j > 0 && u[order[j - 1]] < u[order[j]] {
            order.swap(j - 1, j);
            j -= 1;
        }
    }
}

/// Optimistic distribution within an L1 ball around `p_hat`.
///
/// Returns `argmax { p . u : ||p - p_hat||_1 <= radius, p in simplex }`.
pub fn inner_max_l1(p_hat: &[f64], radius: f64, u: &[f64]) -> Result<Vec<f64>, PlanError> {
    check_distribution(p_hat)?;
    check_values(u, p_hat.len())?;
    if !(0.0..=2.0 + DIST_TOL).contains(&radius) {
        return Err(PlanError::InvalidInput(format!("L1 radius {radius} outside [0, 2]")));
    }
    let mut out = vec![0.0; p_hat.len()];
    l1_into(p_hat, radius, &descending_order(u), &mut out);
    Ok(out)
}

/// Sorted reallocation: move up to `radius / 2` mass onto the best successor,
/// taking it from the worst successors first.
pub(crate) fn l1_into(p_hat: &[f64], radius: f64, order: &[usize], out: &mut [f64]) {
    out.copy_from_slice(p_hat);
    let best = order[0];
    out[best] = (p_hat[best] + radius / 2.0).min(1.0);
    let mut excess = out[best] - p_hat[best];
    for &j in order.iter().skip(1).rev() {
        if excess <= 0.0 {
            break;
        }
        let take = excess.min(out[j]);
        out[j] -= take;
        excess -= take;
    }
}

/// Optimistic distribution within element-wise bounds `lo <= p <= hi`.
pub fn inner_max_box(lo: &[f64], hi: &[f64], u: &[f64]) -> Result<Vec<f64>, PlanError> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(PlanError::InvalidInput("bound vectors differ in length".into()));
    }
    check_values(u, lo.len())?;
    if let Some(j) = (0..lo.len()).find(|&j| !(lo[j] <= hi[j])) {
        return Err(PlanError::InvalidInput(format!("lo[{j}] > hi[{j}]")));
    }
    let lo_sum: f64 = lo.iter().sum();
    let hi_sum: f64 = hi.iter().sum();
    if lo_sum > 1.0 + DIST_TOL || hi_sum < 1.0 - DIST_TOL {
        return Err(PlanError::EmptySet { lo_sum, hi_sum });
    }
    let mut out = vec![0.0; lo.len()];
    box_into(lo, hi, &descending_order(u), &mut out);
    Ok(out)
}

/// Greedy slack filling: start at `lo`, hand out `1 - sum(lo)` in order of
/// decreasing value, each entry up to its `hi`.
pub(crate) fn box_into(lo: &[f64], hi: &[f64], order: &[usize], out: &mut [f64]) {
    out.copy_from_slice(lo);
    let mut slack = 1.0 - lo.iter().sum::<f64>();
    for &j in order {
        if slack <= 0.0 {
            break;
        }
        let add = (hi[j] - lo[j]).min(slack);
        out[j] += add;
        slack -= add;
    }
}

fn check_distribution(p: &[f64]) -> Result<(), PlanError> {
    if p.is_empty() || p.iter().any(|&x| !(x >= -DIST_TOL) || !x.is_finite()) {
        return Err(PlanError::NotADistribution(format!("{p:?}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DIST_TOL {
        return Err(PlanError::NotADistribution(format!("{p:?} sums to {sum}")));
    }
    Ok(())
}

fn check_values(u: &[f64], len: usize) -> Result<(), PlanError> {
    if u.len() != len {
        return Err(PlanError::InvalidInput(format!(
            "value vector has {} entries, expected {len}",
            u.len()
        )));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(PlanError::InvalidInput("non-finite value".into()));
    }
    Ok(())
}
