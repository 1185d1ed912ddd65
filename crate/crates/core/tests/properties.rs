mod common;

use periodic_rl::analysis::{regret_curve, theorem1_bound, theorem2_bound, variation_budget, BoundInputs};
use periodic_rl::envs::{random_pmdp, simulate, simulate_with, Environment, RewardNoise};
use periodic_rl::learners::{CandidateTracker, ScoreMode};
use periodic_rl::model::successor_phase;
use periodic_rl::planner::{
    diameter, inner_max_box, inner_max_l1, modified_evi, optimal_avg_reward, value_iteration, ConfidenceSet,
    EviOptions, L1Set,
};
use periodic_rl::{augment, phase_of, Agent, AgentConfig, AlgorithmKind};
use proptest::prelude::*;

fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

fn row_and_values() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..6).prop_flat_map(|n| (dist(n), prop::collection::vec(-10.0f64..10.0, n)))
}

fn dims() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..4, 1usize..4, 2usize..6, any::<u64>())
}

fn run(kind: AlgorithmKind, periods: Vec<usize>, spec: &periodic_rl::PmdpSpec, horizon: u64, seed: u64) -> String {
    let config = AgentConfig::new(kind, periods);
    let mut agent = Agent::new(config, spec.states(), spec.actions()).unwrap();
    simulate(spec, &mut agent, horizon, seed).unwrap().to_csv()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn augment_round_trips((s, a, n, seed) in dims()) {
        let spec = random_pmdp(s, a, n, seed, 0.0);
        let model = augment(&spec);
        prop_assert_eq!(model.to_spec().unwrap(), spec);
    }

    #[test]
    fn phase_is_periodic(t in 1u64..1_000_000, n in 1usize..50) {
        let p = phase_of(t, n);
        prop_assert!((1..=n).contains(&p));
        prop_assert_eq!(phase_of(t + n as u64, n), p);
        prop_assert_eq!(phase_of(t + 1, n), successor_phase(p, n));
    }

    #[test]
    fn augmented_rows_only_reach_next_phase((s, a, n, seed) in dims()) {
        let spec = random_pmdp(s, a, n, seed, 0.05_f64.min(1.0 / s as f64));
        let model = augment(&spec);
        let shape = model.shape();
        for x in 0..shape.aug_states() {
            let (_, phase_idx) = shape.split(x);
            let next = shape.next_phase_idx(phase_idx);
            for act in 0..a {
                let full = model.full_row(x, act);
                for (y, &p) in full.iter().enumerate() {
                    if shape.split(y).1 != next {
                        prop_assert_eq!(p, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn l1_inner_max_is_feasible_and_optimistic((p_hat, u) in row_and_values(), r1 in 0.0f64..2.0, r2 in 0.0f64..2.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let p = inner_max_l1(&p_hat, lo, &u).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(common::l1(&p, &p_hat) <= lo + 1e-9);
        let v_lo = common::value(&p, &u);
        prop_assert!(v_lo >= common::value(&p_hat, &u) - 1e-9);
        let v_hi = common::value(&inner_max_l1(&p_hat, hi, &u).unwrap(), &u);
        prop_assert!(v_hi >= v_lo - 1e-9);
    }

    #[test]
    fn box_inner_max_is_feasible_and_optimistic((center, u) in row_and_values(), w in 0.0f64..0.5) {
        let lo: Vec<f64> = center.iter().map(|c| (c - w).max(0.0)).collect();
        let hi: Vec<f64> = center.iter().map(|c| (c + w).min(1.0)).collect();
        let p = inner_max_box(&lo, &hi, &u).unwrap();
        for j in 0..p.len() {
            prop_assert!(lo[j] - 1e-12 <= p[j] && p[j] <= hi[j] + 1e-12);
        }
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(common::value(&p, &u) >= common::value(&center, &u) - 1e-9);
        let wider_lo: Vec<f64> = lo.iter().map(|x| (x - 0.1).max(0.0)).collect();
        let wider_hi: Vec<f64> = hi.iter().map(|x| (x + 0.1).min(1.0)).collect();
        let wider = inner_max_box(&wider_lo, &wider_hi, &u).unwrap();
        prop_assert!(common::value(&wider, &u) >= common::value(&p, &u) - 1e-9);
    }

    #[test]
    fn diameter_is_finite_and_capped((s, a, n, seed) in dims()) {
        let m = 0.05_f64.min(1.0 / s as f64);
        let spec = random_pmdp(s, a, n, seed, m);
        let d = diameter(&augment(&spec)).unwrap();
        prop_assert!(d >= (n - 1) as f64 - 1e-9);
        prop_assert!(d <= n as f64 / m + 1e-6, "{} > {}", d, n as f64 / m);
    }

    #[test]
    fn variation_budget_is_bounded((s, a, n, seed) in dims(), horizon in 2u64..500) {
        let spec = random_pmdp(s, a, n, seed, 0.0);
        let budget = variation_budget(&spec, horizon).unwrap();
        let mut brute = 0.0;
        for t in 1..horizon {
            let (p, q) = (phase_of(t, n), phase_of(t + 1, n));
            let mut worst: f64 = 0.0;
            for st in 0..s {
                for act in 0..a {
                    worst = worst.max((spec.reward(q, st, act) - spec.reward(p, st, act)).abs());
                }
            }
            brute += worst;
        }
        prop_assert!((budget - brute).abs() < 1e-9);
        prop_assert!(budget <= (horizon - 1) as f64 + 1e-12);
    }

    #[test]
    fn second_bound_is_tighter(
        d in 1.0f64..100.0,
        s in 1usize..5,
        n in 2usize..21,
        a in 1usize..5,
        t in 1e5f64..1e7,
        delta in 0.01f64..0.2,
    ) {
        let inputs = BoundInputs::new(d, s, n, a, t, delta);
        let t1 = theorem1_bound(inputs).unwrap();
        let t2 = theorem2_bound(inputs, 34.0, None).unwrap().total();
        prop_assert!(t2 <= t1, "{} > {}", t2, t1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn singleton_evi_matches_value_iteration((s, a, n, seed) in dims()) {
        let spec = random_pmdp(s, a, n, seed, 0.05_f64.min(1.0 / s as f64));
        let model = augment(&spec);
        let eps = 1e-6;
        let plan = modified_evi(&ConfidenceSet::singleton(&model), EviOptions::new(eps)).unwrap();
        let vi = value_iteration(&model, EviOptions::new(eps)).unwrap();
        prop_assert!((plan.gain - vi.gain).abs() <= eps);
        prop_assert_eq!(plan.model, model);
    }

    #[test]
    fn evi_is_optimistic_when_the_truth_is_inside((s, a, n, seed) in dims(), radius in 0.0f64..1.0, bonus in 0.0f64..0.3) {
        let spec = random_pmdp(s, a, n, seed, 0.05_f64.min(1.0 / s as f64));
        let model = augment(&spec);
        let shape = model.shape();
        let rho = optimal_avg_reward(&model).unwrap().gain;
        let set = ConfidenceSet::L1(L1Set::new(
            shape,
            model.rows().to_vec(),
            vec![radius; shape.pairs()],
            model.rewards().to_vec(),
            model.rewards().iter().map(|r| (r + bonus).min(1.0)).collect(),
        ).unwrap());
        prop_assert!(set.contains(&model));
        let eps = 1e-4;
        let plan = modified_evi(&set, EviOptions::new(eps)).unwrap();
        prop_assert!(plan.gain >= rho - eps, "{} < {}", plan.gain, rho);
        prop_assert!(set.contains(&plan.model));
    }

    #[test]
    fn agent_conserves_counts_and_respects_doubling(
        (s, a, n, seed) in (1usize..3, 1usize..3, 2usize..4, any::<u64>()),
        kind in prop::sample::select(AlgorithmKind::ALL.to_vec()),
        horizon in 1u64..600,
    ) {
        let spec = random_pmdp(s, a, n, seed, 0.05_f64.min(1.0 / s as f64));
        let periods = if kind.unknown_period() { vec![2, 3] } else { vec![n] };
        let mut agent = Agent::new(AgentConfig::new(kind, periods), s, a).unwrap();
        let mut env = Environment::new(spec, RewardNoise::Bernoulli, seed);
        for t in 1..=horizon {
            let action = agent.act(env.state()).unwrap();
            let (r, next) = env.step(action);
            agent.absorb(r, next).unwrap();
            let tracker = agent.tracker();
            for i in 0..tracker.periods().len() {
                prop_assert_eq!(tracker.stats(i).total_visits(), t);
            }
            let stats = tracker.selected_stats();
            for pair in 0..stats.shape().pairs() {
                prop_assert!(stats.in_episode(pair) <= stats.episode_count(pair));
            }
        }
        let starts: Vec<u64> = agent.history().iter().map(|e| e.start).collect();
        prop_assert_eq!(starts.first().copied(), Some(1));
        prop_assert!(starts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn candidate_order_does_not_matter(seed in any::<u64>(), horizon in 50u64..400) {
        let spec = random_pmdp(2, 2, 3, seed, 0.05);
        let forward = run(AlgorithmKind::UPucrl2, vec![2, 3, 4], &spec, horizon, seed);
        let shuffled = run(AlgorithmKind::UPucrl2, vec![4, 2, 3], &spec, horizon, seed);
        prop_assert_eq!(forward, shuffled);
    }

    #[test]
    fn single_candidate_reduces_to_known_period(seed in any::<u64>(), horizon in 50u64..400) {
        let spec = random_pmdp(2, 2, 3, seed, 0.05);
        prop_assert_eq!(
            run(AlgorithmKind::UPucrl2, vec![3], &spec, horizon, seed),
            run(AlgorithmKind::Pucrl2, vec![3], &spec, horizon, seed)
        );
        prop_assert_eq!(
            run(AlgorithmKind::UPucrlb, vec![3], &spec, horizon, seed),
            run(AlgorithmKind::Pucrlb, vec![3], &spec, horizon, seed)
        );
    }

    #[test]
    fn regret_telescopes(seed in any::<u64>(), horizon in 1u64..300) {
        let spec = random_pmdp(2, 2, 3, seed, 0.05);
        let mut agent = Agent::new(AgentConfig::new(AlgorithmKind::Pucrlb, vec![3]), 2, 2).unwrap();
        let log = simulate(&spec, &mut agent, horizon, seed).unwrap();
        prop_assert!(log.is_consistent());
        let curve = regret_curve(&log, &spec).unwrap();
        let rho = curve.rho_star;
        let mut prev = 0.0;
        for (i, step) in log.steps.iter().enumerate() {
            let inc = curve.regret[i] - prev;
            prop_assert!((inc - (rho - spec.reward(step.n, step.s, step.a))).abs() < 1e-9);
            prop_assert!((curve.regret[i] - ((i + 1) as f64 * rho - curve.reward[i])).abs() < 1e-9);
            prev = curve.regret[i];
        }
    }

    #[test]
    fn optimistic_models_stay_phase_sparse(seed in any::<u64>()) {
        let spec = random_pmdp(2, 2, 3, seed, 0.05);
        for kind in AlgorithmKind::ALL {
            let periods = if kind.unknown_period() { vec![2, 3, 4] } else { vec![3] };
            let mut agent = Agent::new(AgentConfig::new(kind, periods), 2, 2).unwrap();
            let mut ok = true;
            simulate_with(&spec, &mut agent, 300, seed, |ag| {
                let model = &ag.plan().unwrap().model;
                let shape = model.shape();
                for x in 0..shape.aug_states() {
                    let next = shape.next_phase_idx(shape.split(x).1);
                    for act in 0..shape.actions {
                        ok &= model.full_row(x, act).iter().enumerate().all(|(y, &p)| p == 0.0 || shape.split(y).1 == next);
                    }
                }
            }).unwrap();
            prop_assert!(ok);
        }
    }
}

#[test]
fn tracker_selection_ignores_candidate_order() {
    let mut a = CandidateTracker::new(2, 2, &[2, 3, 5]);
    let mut b = CandidateTracker::new(2, 2, &[5, 2, 3]);
    let spec = random_pmdp(2, 2, 3, 1, 0.05);
    let mut env = Environment::new(spec, RewardNoise::Bernoulli, 1);
    for t in 1..=200 {
        let action = (t as usize / 7) % 2;
        let s = env.state();
        let (r, next) = env.step(action);
        a.update_all(t, s, action, r, next);
        b.update_all(t, s, action, r, next);
    }
    let opts = EviOptions::new(0.01);
    a.score_all(opts, ScoreMode::Cumulative).unwrap();
    b.score_all(opts, ScoreMode::Cumulative).unwrap();
    a.select();
    b.select();
    assert_eq!(a.selected_period(), b.selected_period());
}
