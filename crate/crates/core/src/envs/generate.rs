use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::model::PmdpSpec;

/// `arctan(1 / tan(pi (t + 0.5) / N)) / N`, the sawtooth offset at integer `t`.
fn sawtooth_offset(t: usize, period: usize) -> f64 {
    let tan = (PI * (t as f64 + 0.5) / period as f64).tan();
    assert!(tan != 0.0 && tan.is_finite(), "sawtooth phase argument hits a pole");
    (1.0 / tan).atan() / period as f64
}

/// Triangular offset `t/N - floor(0.5 + t/N)` in `[-0.5, 0.5)`.
fn triangle(t: usize, period: usize) -> f64 {
    let x = t as f64 / period as f64;
    x - (0.5 + x).floor()
}

/// Reward of the two-state sawtooth benchmark at phase `phase` (1-based).
pub fn sawtooth_reward(phase: usize, s: usize, a: usize, period: usize) -> f64 {
    let t = phase - 1;
    let sign = if a == 0 { 1.0 } else { -1.0 };
    match s {
        0 => 0.5 + sign * sawtooth_offset(t, period),
        _ => 0.4 + sign * 0.8 * triangle(t, period),
    }
}

/// Probability that action 2 switches state at phase `phase`.
pub fn sawtooth_beta(phase: usize, period: usize) -> f64 {
    0.5 - sawtooth_offset(phase - 1, period)
}

/// The two-state, two-action benchmark whose rewards and switching
/// probabilities follow sawtooth profiles of period `N`.
///
/// Phase `n` evaluates the profiles at `t = n - 1`. Action 1 keeps the
/// current state; action 2 switches state with probability `beta_n`
/// from state 1 and returns to state 1 with probability `beta_n` from state 2.
pub fn sawtooth_env(period: usize) -> PmdpSpec {
    assert!(period >= 2, "sawtooth period must be at least 2");
    PmdpSpec::from_fn(
        2,
        2,
        period,
        |n, s, a| sawtooth_reward(n, s, a, period),
        |n, s, a, next| {
            let beta = sawtooth_beta(n, period);
            match (s, a, next) {
                (0, 0, 0) | (1, 0, 1) => 1.0,
                (0, 0, 1) | (1, 0, 0) => 0.0,
                (0, 1, 0) => 1.0 - beta,
                (0, 1, 1) => beta,
                (1, 1, 0) => beta,
                _ => 1.0 - beta,
            }
        },
    )
    .expect("sawtooth tables are valid")
}

/// A random periodic MDP, reproducible from `seed`.
///
/// Rewards are uniform on `[0, 1)`. Each transition row `q` is drawn from the
/// flat Dirichlet distribution and mixed as `(1 - S m) q + m`, so every entry
/// is at least `min_mass` and `min_mass = 1 / S` gives uniform rows.
pub fn random_pmdp(states: usize, actions: usize, period: usize, seed: u64, min_mass: f64) -> PmdpSpec {
    assert!(states >= 1 && actions >= 1, "state and action counts must be positive");
    assert!(period >= 2, "period must be at least 2");
    assert!(
        (0.0..=1.0 / states as f64 + 1e-15).contains(&min_mass),
        "min_mass must lie in [0, 1/S]"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = states * actions * period;
    let rewards: Vec<f64> = (0..pairs).map(|_| rng.random::<f64>()).collect();
    let weight = (1.0 - states as f64 * min_mass).max(0.0);
    let mut kernels = Vec::with_capacity(pairs * states);
    for _ in 0..pairs {
        let draws: Vec<f64> = (0..states).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        kernels.extend(draws.iter().map(|d| {
            let q = if total > 0.0 { d / total } else { 1.0 / states as f64 };
            weight * q + min_mass
        }));
    }
    let per_phase = states * actions;
    PmdpSpec::from_fn(
        states,
        actions,
        period,
        |n, s, a| rewards[(n - 1) * per_phase + s * actions + a],
        |n, s, a, next| kernels[((n - 1) * per_phase + s * actions + a) * states + next],
    )
    .expect("generated tables are valid")
}
