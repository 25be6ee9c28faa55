mod common;

use std::collections::HashMap;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sensorsched::environment::CoverageTensor;
use sensorsched::online::{
    bonus_term, clip_estimate, draw_feedback, estimate_matrix_homogeneous, intruder_step, regret_bound_homogeneous,
    regret_summary, run_heterogeneous, run_homogeneous, sample_simplex, ucb_components, ucb_matrix, ucb_regret_bound,
    BoundCase, EstimatorState, Feedback, HeterogeneousConfig, HomogeneousConfig, OnlineTrace, PolicySpec,
};
use sensorsched::payoff::{GameInstance, MixedStrategy, SensorModel};
use sensorsched::solvers::{exploitability_gap, solve_exact};

fn single_cell(v: u32, p: f64, hi: f64) -> GameInstance {
    let model = SensorModel {
        coverage: CoverageTensor::from_nested(&[vec![vec![v]]]).unwrap(),
        p_detect: vec![p],
        p_bounds: vec![(0.1, hi)],
        orientation_costs: vec![vec![0.0]],
    };
    GameInstance::from_model(model, vec![0.0]).unwrap()
}

fn feedback_from_counts(hits: &[u64], draws: &[u64]) -> Feedback {
    Feedback {
        bits: hits.iter().zip(draws).map(|(&h, &n)| (0..n).map(|k| k < h).collect()).collect(),
    }
}

#[test]
fn feedback_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let i = joint(&[0], 1);
    let empty = draw_feedback(&single_cell(0, 0.8, 0.9), &i, 0, &mut rng).unwrap();
    assert_eq!(empty.total_draws(), 0);

    let sure = single_cell(5, 1.0 - 1e-12, 1.0 - 1e-13);
    let a = draw_feedback(&sure, &i, 0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = draw_feedback(&sure, &i, 0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.bits, vec![vec![true; 5]]);
}

#[test]
fn feedback_mean_is_within_hoeffding_margin() {
    let inst = single_cell(1000, 0.8, 0.9);
    let i = joint(&[0], 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut est = EstimatorState::new(1);
    for _ in 0..100 {
        est.record(0, 0, &draw_feedback(&inst, &i, 0, &mut rng).unwrap());
    }
    assert_eq!(est.total_draws(), 100_000);
    let mean = est.total_hits() as f64 / 1e5;
    assert!((mean - 0.8).abs() <= 0.01, "{mean}");
}

#[test]
fn heterogeneous_feedback_has_one_bit_per_covering_sensor() {
    let inst = two_sensor_game();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for flat in 0..4 {
        let i = sensorsched::JointStrategy::decode(flat, 2, 2).unwrap();
        for j in 0..4 {
            let fb = draw_feedback(&inst, &i, j, &mut rng).unwrap();
            let cov = &inst.model().unwrap().coverage;
            let expected: u64 = (0..2).map(|q| cov.get(q, i.orientations()[q], j) as u64).sum();
            assert_eq!(fb.total_draws(), expected);
            assert_eq!(u64::from(inst.total_coverage(&i, j).unwrap()), expected);
        }
    }
}

#[test]
fn simplex_draws_have_uniform_coordinate_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 5;
    let mut sums = vec![0.0; n];
    for _ in 0..100_000 {
        let y = sample_simplex(n, &mut rng);
        assert!((y.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (s, v) in sums.iter_mut().zip(y.probs()) {
            *s += v;
        }
    }
    for s in sums {
        assert!((s / 1e5 - 0.2).abs() < 0.01);
    }
}

#[test]
fn equilibrium_policy_on_matching_pennies() {
    let pennies = GameInstance::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
    let eq = solve_exact(&pennies).unwrap();
    let policy = PolicySpec::Ne.resolve(&eq.intruder);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..10 {
        let (y, j) = intruder_step(&policy, 2, &mut rng);
        assert!((y.probs()[0] - 0.5).abs() < 1e-12 && (y.probs()[1] - 0.5).abs() < 1e-12);
        assert!(j < 2);
    }
}

#[test]
fn estimate_matrix_examples() {
    let inst = single_cell(2, 0.8, 0.9);
    let est = estimate_matrix_homogeneous(&inst, 0.5).unwrap();
    assert!((est.dense().unwrap()[0] - 2.0 * 0.5f64.ln()).abs() < 1e-15);
    assert!((est.dense().unwrap()[0] + 1.38629).abs() < 1e-5);
    let truth = regret_problem(0).truth;
    let same = estimate_matrix_homogeneous(&truth, 0.8).unwrap();
    assert_eq!(same.dense().unwrap(), truth.dense().unwrap());
    assert!(estimate_matrix_homogeneous(&truth, 1.0).is_err());
}

#[test]
fn estimate_perturbation_is_bounded() {
    let grid = fixture_instance(2, 12).with_homogeneous_detection(0.7).unwrap();
    for truth in [regret_problem(1).truth, grid] {
        let model = truth.model().unwrap();
        let p = model.p_detect[0];
        let (lo, hi) = model.p_bounds.iter().fold((0.0f64, 1.0f64), |(a, b), c| (a.max(c.0), b.min(c.1)));
        let problem = problem_for("t", &truth);
        let a = truth.dense().unwrap();
        for k in 0..=20 {
            let p_hat = lo + (hi - lo) * k as f64 / 20.0;
            let est = estimate_matrix_homogeneous(&truth, p_hat).unwrap();
            let worst = est.dense().unwrap().iter().zip(a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(worst <= problem.v_max() * (p_hat - p).abs() / (1.0 - hi) + 1e-12, "p_hat {p_hat}");
        }
    }
}

#[test]
fn learner_at_truth_against_equilibrium_has_no_regret() {
    let problem = regret_problem(4);
    let policy = problem.policy(PolicySpec::Ne);
    let cfg = HomogeneousConfig { estimate_override: Some(0.8), ..HomogeneousConfig::default() };
    let trace = run_homogeneous(&problem, &policy, 200, 8, &cfg).unwrap();
    for r in &trace.rounds {
        assert!(r.regret >= -1e-9, "round {}: {}", r.t, r.regret);
        assert!(r.regret.abs() <= 1e-9);
    }
}

#[test]
fn final_estimate_is_within_hoeffding_width() {
    let problem = regret_problem(0);
    let policy = problem.policy(PolicySpec::Random);
    let eta: f64 = 0.05;
    let mut covered = 0;
    for seed in 0..100 {
        let trace = run_homogeneous(&problem, &policy, 100, seed, &HomogeneousConfig::default()).unwrap();
        let hits: u64 = trace.rounds.iter().map(|r| r.hits[0]).sum();
        let draws: u64 = trace.rounds.iter().map(|r| r.draws[0]).sum();
        let p_hat = hits as f64 / draws as f64;
        let width = ((2.0 / eta).ln() / (2.0 * draws as f64)).sqrt();
        if (p_hat - 0.8).abs() <= width {
            covered += 1;
        }
    }
    assert!(covered >= 95, "{covered} of 100");
}

#[test]
fn homogeneous_bound_values() {
    let coef = 5.0 * 2f64.sqrt() * 20.0 / (1.0 - 0.9);
    let oracle = coef * (1000.0 * (2.0 * 1000.0 / 0.05f64).ln()).sqrt();
    let case1 = regret_bound_homogeneous(1000, 0.05, 20.0, 0.9, BoundCase::EquilibriumOpponent).unwrap();
    assert!((case1 - oracle).abs() <= 1e-9 * oracle);
    assert!((case1 / 1.456e5 - 1.0).abs() < 1e-3);
    let case2 = regret_bound_homogeneous(1000, 0.05, 20.0, 0.9, BoundCase::Other).unwrap();
    assert!((case2 - 0.4 * case1).abs() <= 1e-9 * case1);
    let f = |t, a| regret_bound_homogeneous(t, a, 20.0, 0.9, BoundCase::Other).unwrap();
    for t in [1, 10, 100, 1000] {
        assert!(f(t + 1, 0.05) > f(t, 0.05));
        assert!(f(t, 0.01) > f(t, 0.05) && f(t, 0.05) > f(t, 0.2));
    }
    assert!(regret_bound_homogeneous(0, 0.05, 20.0, 0.9, BoundCase::Other).is_err());
    assert!(regret_bound_homogeneous(10, 1.0, 20.0, 0.9, BoundCase::Other).is_err());
}

#[test]
fn ucb_bound_values() {
    let oracle = 1.0 + 30.0 * 2.0 * (2.0 * 2.0 * 4.0 * 2000.0 * (4.0 * 2000.0f64.powi(2) * 16.0).ln()).sqrt();
    let got = ucb_regret_bound(2000, 2, 2, 4, 3.0, 0.9).unwrap();
    assert!((got - oracle).abs() <= 1e-9 * oracle);
    assert!((got - 47227.5948156).abs() < 1e-6);

    let t = 1_000_000;
    let ratio = ucb_regret_bound(4 * t, 2, 2, 4, 3.0, 0.9).unwrap() / ucb_regret_bound(t, 2, 2, 4, 3.0, 0.9).unwrap();
    assert!((ratio / 2.0 - 1.0).abs() < 0.05, "{ratio}");

    let doubled = ucb_regret_bound(2000, 4, 2, 4, 3.0, 0.9).unwrap() / got;
    assert!((1.9..2.2).contains(&doubled), "{doubled}");
    assert!(ucb_regret_bound(15, 2, 2, 4, 3.0, 0.9).is_err());
}

#[test]
fn ucb_single_entry_example() {
    let template = single_cell(2, 0.8, 0.9);
    let mut est = EstimatorState::new(1);
    for _ in 0..8 {
        est.record(0, 0, &feedback_from_counts(&[1], &[2]));
    }
    assert_eq!(est.pair_count(0, 0, 0), 8);
    let parts = ucb_components(&est, &template, 0.5, &[0.5], 1.0).unwrap();
    assert!((parts.mean[0] + 1.38629).abs() < 1e-5);
    assert!((parts.bonus[0] - 5.8871).abs() < 1e-4);
    let upper = ucb_matrix(&est, &template, 0.5).unwrap().dense().unwrap()[0];
    assert!((upper - 4.5008).abs() < 1e-4, "{upper}");
    assert!(ucb_matrix(&est, &template, 1.0).is_err());

    let mut last = f64::INFINITY;
    for n in [1u64, 10, 1_000, 1_000_000, 1 << 40] {
        let b = bonus_term(20.0, 0.5, n);
        assert!(b < last);
        last = b;
    }
    assert!(last < 1e-4);
}

#[test]
fn zero_bonus_at_truth_plays_the_exact_equilibrium() {
    let problem = problem_for("two-sensor", &two_sensor_game());
    let eq = solve_exact(&problem.truth).unwrap();
    let cfg = HeterogeneousConfig {
        bonus_scale: 0.0,
        estimate_override: Some(vec![0.8, 0.6]),
        keep_strategies: true,
        ..HeterogeneousConfig::default()
    };
    let policy = problem.policy(PolicySpec::Random);
    let trace = run_heterogeneous(&problem, &policy, 50, 2, &cfg).unwrap();
    for ((x, _), r) in trace.strategies.as_ref().unwrap().iter().zip(&trace.rounds) {
        assert!(exploitability_gap(&problem.truth, x, problem.y_dagger()).unwrap() <= 1e-9);
        let v = sensorsched::solvers::expected_payoff(&problem.truth, x, problem.y_dagger()).unwrap();
        assert!((v - eq.value_estimate).abs() <= 1e-9);
        assert_eq!(r.min_bonus, Some(0.0));
    }
}

#[test]
fn pair_counts_match_a_recount_of_the_trace() {
    let problem = problem_for("two-sensor", &two_sensor_game());
    let policy = problem.policy(PolicySpec::Random);
    let trace = run_heterogeneous(&problem, &policy, 300, 5, &HeterogeneousConfig::default()).unwrap();
    let mut seen: HashMap<(usize, usize), Vec<u64>> = HashMap::new();
    let mut est = EstimatorState::new(2);
    let mut positive = 0;
    for r in &trace.rounds {
        let before = seen.entry((r.i, r.j)).or_insert_with(|| vec![0; 2]);
        assert_eq!(&r.counts, before);
        for (count, &draws) in before.iter_mut().zip(&r.draws) {
            if draws > 0 {
                *count += 1;
                positive += 1;
            }
        }
        est.record(r.i, r.j, &feedback_from_counts(&r.hits, &r.draws));
    }
    assert_eq!(est.total_pair_counts(), positive);
}

#[test]
fn seeded_runs_are_bit_identical() {
    let hom = regret_problem(2);
    let het = problem_for("two-sensor", &two_sensor_game());
    let csv = |t: &OnlineTrace| {
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        buf
    };
    for spec in [PolicySpec::Ne, PolicySpec::Random, PolicySpec::Fixed(1)] {
        let a = run_homogeneous(&hom, &hom.policy(spec), 60, 13, &HomogeneousConfig::default()).unwrap();
        let b = run_homogeneous(&hom, &hom.policy(spec), 60, 13, &HomogeneousConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(csv(&a), csv(&b));
        let a = run_heterogeneous(&het, &het.policy(spec), 60, 13, &HeterogeneousConfig::default()).unwrap();
        let b = run_heterogeneous(&het, &het.policy(spec), 60, 13, &HeterogeneousConfig::default()).unwrap();
        assert_eq!(csv(&a), csv(&b));
    }
}

#[test]
fn upper_confidence_matrix_dominates_truth_in_most_rounds() {
    let problem = problem_for("two-sensor", &two_sensor_game());
    let truth = problem.truth.dense().unwrap();
    let n = problem.truth.num_paths();
    let bounds = problem.truth.model().unwrap().p_bounds.clone();
    let cfg = HeterogeneousConfig { delta: Some(0.1), ..HeterogeneousConfig::default() };
    let policy = problem.policy(PolicySpec::Random);
    let (mut good, mut total) = (0u64, 0u64);
    for seed in 0..200 {
        let trace = run_heterogeneous(&problem, &policy, 40, seed, &cfg).unwrap();
        let mut est = EstimatorState::new(2);
        for r in &trace.rounds {
            est.record(r.i, r.j, &feedback_from_counts(&r.hits, &r.draws));
            let p_hat = est.sensor_estimates(&bounds);
            let parts = ucb_components(&est, &problem.truth, 0.1, &p_hat, 1.0).unwrap();
            let upper = parts.upper();
            assert!(parts.bonus.iter().all(|&b| b >= 0.0));
            let ok = est.visited_pairs().all(|(&(i, j), _)| upper[i * n + j] >= truth[i * n + j]);
            good += ok as u64;
            total += 1;
        }
    }
    assert!(good as f64 >= 0.85 * total as f64, "{good} of {total}");
}

#[test]
fn summary_matches_recomputation_from_strategies() {
    let problem = regret_problem(3);
    let cfg = HomogeneousConfig { keep_strategies: true, ..HomogeneousConfig::default() };
    let trace = run_homogeneous(&problem, &problem.policy(PolicySpec::Random), 150, 21, &cfg).unwrap();
    let summary = regret_summary(&trace);
    assert!(summary.consistent);
    let mut total = 0.0;
    for ((x, y), r) in trace.strategies.as_ref().unwrap().iter().zip(&trace.rounds) {
        total += problem.payoff(x, y).unwrap() - problem.value;
        assert!((total - r.cumulative).abs() <= 1e-9 * total.abs().max(1.0));
    }
    assert!((summary.final_regret - total).abs() <= 1e-9 * total.abs().max(1.0));
    assert_eq!(summary.cumulative.len(), 150);
}

#[test]
fn intruder_policies_emit_valid_strategies() {
    let y = MixedStrategy::from_weights(&[1.0, 3.0, 0.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for policy in [
        sensorsched::online::IntruderPolicy::FixedMixed(y.clone()),
        sensorsched::online::IntruderPolicy::UniformSimplex,
        sensorsched::online::IntruderPolicy::FixedPure(2),
    ] {
        for _ in 0..50 {
            let (y, j) = intruder_step(&policy, 3, &mut rng);
            assert!((y.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(y.probs().iter().all(|&v| v >= 0.0));
            assert!(y.probs()[j] > 0.0);
        }
    }
}

proptest! {
    #[test]
    fn clipping_stays_in_bounds_and_on_the_same_side(raw in -1.0f64..2.0, lo in 0.01f64..0.5, width in 0.01f64..0.49, t in 0.0f64..=1.0) {
        let hi = lo + width;
        let p = lo + t * width;
        let c = clip_estimate(raw, lo, hi);
        prop_assert!((lo..=hi).contains(&c));
        if (lo..=hi).contains(&raw) {
            prop_assert_eq!(c, raw);
        }
        prop_assert!((c - p) * (raw - p) >= 0.0);
        prop_assert!((c - p).abs() <= (raw - p).abs());
    }
}
