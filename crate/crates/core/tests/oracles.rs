mod common;

use common::*;
use periodic_rl::envs::{random_pmdp, sawtooth_env, sawtooth_reward, Environment, RewardNoise};
use periodic_rl::planner::{
    enumerate_optimal, inner_max_box, inner_max_l1, optimal_avg_reward, policy_avg_reward, value_iteration,
    EviOptions,
};
use periodic_rl::{augment, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn optimal_gain_matches_policy_enumeration() {
    for seed in 0..20 {
        let spec = random_pmdp(2, 2, 3, seed, 0.05);
        let model = augment(&spec);
        let oracle = brute_force_optimum(&spec);
        let exact = optimal_avg_reward(&model).unwrap().gain;
        let vi = value_iteration(&model, EviOptions::new(1e-10)).unwrap().gain;
        let (enumerated, _) = enumerate_optimal(&model).unwrap();
        assert!((exact - oracle).abs() <= 1e-6, "seed {seed}: {exact} vs {oracle}");
        assert!((vi - oracle).abs() <= 1e-6, "seed {seed}: {vi} vs {oracle}");
        assert!((enumerated - oracle).abs() <= 1e-9, "seed {seed}: {enumerated} vs {oracle}");
    }
}

#[test]
fn policy_gain_matches_stationary_distribution() {
    for seed in 0..10 {
        let spec = random_pmdp(3, 2, 4, 100 + seed, 0.02);
        let model = augment(&spec);
        for pol in all_policies(&spec).iter().step_by(97) {
            let (p, r) = policy_chain(&spec, pol);
            let oracle = irreducible_gain(&p, &r);
            let got = policy_avg_reward(&model, &Policy::new(model.shape(), pol.clone()).unwrap());
            assert!((got.gain - oracle).abs() <= 1e-10, "{} vs {oracle}", got.gain);
            assert!(!got.multichain);
        }
    }
}

#[test]
fn lazy_transform_preserves_policy_gain() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..20 {
        let spec = random_pmdp(2, 2, 3, 500 + i, 0.05);
        let model = augment(&spec);
        let pol: Vec<usize> = (0..6).map(|_| rng.random_range(0..2)).collect();
        let tau = [0.3, 0.7, 0.9][i as usize % 3];
        let (p, r) = policy_chain(&spec, &pol);
        let plain = irreducible_gain(&p, &r);
        let lazy_gain = irreducible_gain(&lazy(&p, tau), &r);
        assert!((plain - lazy_gain).abs() <= 1e-8);
        let chain = periodic_rl::planner::induced_chain(&model, &Policy::new(model.shape(), pol).unwrap());
        let lib = chain.aperiodic(tau).gain_from(0).gain;
        assert!((lib - plain).abs() <= 1e-8, "{lib} vs {plain}");
    }
}

fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

#[test]
fn l1_inner_max_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = rng.random_range(2..=3);
        let p_hat = random_dist(&mut rng, n);
        let radius = rng.random_range(0.0..2.0);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let p = inner_max_l1(&p_hat, radius, &u).unwrap();
        assert!(l1(&p, &p_hat) <= radius + 1e-9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let grid = grid_l1_max(&p_hat, radius, &u, 1000);
        let got = value(&p, &u);
        assert!(got >= grid - 1e-9, "grid point beats the maximizer: {grid} > {got}");
        assert!(got - grid <= 2e-3 * u.iter().fold(1.0f64, |m, x| m.max(x.abs())), "{got} vs {grid}");
    }
}

#[test]
fn box_inner_max_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let n = rng.random_range(2..=5);
        let center = random_dist(&mut rng, n);
        let lo: Vec<f64> = center.iter().map(|c| (c - rng.random_range(0.0..0.3)).max(0.0)).collect();
        let hi: Vec<f64> = center.iter().map(|c| (c + rng.random_range(0.0..0.3)).min(1.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let p = inner_max_box(&lo, &hi, &u).unwrap();
        for j in 0..n {
            assert!(lo[j] - 1e-12 <= p[j] && p[j] <= hi[j] + 1e-12);
        }
        let oracle = vertex_box_max(&lo, &hi, &u);
        assert!((value(&p, &u) - oracle).abs() <= 1e-12, "{} vs {oracle}", value(&p, &u));
    }
}

#[test]
fn sawtooth_optimal_gain_regression() {
    let model = augment(&sawtooth_env(5));
    let (best, _) = enumerate_optimal(&model).unwrap();
    assert!((best - 0.627_671_265_554_890_7).abs() < 1e-12, "{best}");
    let vi = optimal_avg_reward(&model).unwrap().gain;
    assert!((vi - best).abs() < 1e-6);
}

#[test]
fn stay_policy_monte_carlo() {
    let spec = sawtooth_env(5);
    let expected: f64 = (1..=5).map(|n| sawtooth_reward(n, 0, 0, 5)).sum::<f64>() / 5.0;
    let exact = policy_avg_reward(&augment(&spec), &Policy::constant(spec.shape(), 0).unwrap()).gain;
    assert!((exact - expected).abs() < 1e-12);
    let mut env = Environment::new(spec, RewardNoise::Bernoulli, 9);
    let steps = 200_000;
    let mut total = 0.0;
    for _ in 0..steps {
        let (r, s) = env.step(0);
        assert_eq!(s, 0);
        total += r;
    }
    let mean = total / steps as f64;
    // Five standard errors of a Bernoulli mean.
    assert!((mean - expected).abs() < 5.0 * 0.5 / (steps as f64).sqrt(), "{mean} vs {expected}");
}
