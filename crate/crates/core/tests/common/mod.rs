#![allow(dead_code)]

use rand::Rng;
use sensorsched::environment::{CoverageTensor, EnvConfig, GridEnvironment, SensorParams, NINE_ROOM_MAP};
use sensorsched::experiment::{generate_synthetic, grid_scenario, SyntheticSpec};
use sensorsched::online::{InnerSolver, OnlineProblem};
use sensorsched::payoff::{GameInstance, JointStrategy, MixedStrategy, ProductStrategy, SensorModel};

pub fn fixture_env() -> GridEnvironment {
    GridEnvironment::parse(NINE_ROOM_MAP).unwrap()
}

/// Nine-room world with nonzero costs and distinct detection rates.
pub fn fixture_config(paths: usize) -> EnvConfig {
    let p = [0.8, 0.6, 0.7, 0.9, 0.75, 0.65, 0.85, 0.7, 0.8, 0.6];
    EnvConfig {
        range: Some(6),
        cone_width: 3,
        orientation_costs: vec![0.0, 0.4, 0.1, 0.25],
        path_cost_scale: 0.05,
        num_paths: paths,
        sensors: p.iter().map(|&p_true| SensorParams { p_true, p_min: 0.3, p_max: 0.95, orientation_costs: None }).collect(),
        ..EnvConfig::default()
    }
}

pub fn fixture_instance(sensors: usize, paths: usize) -> GameInstance {
    grid_scenario(&fixture_env(), &fixture_config(paths), Some(sensors)).unwrap().instance
}

pub fn random_mixed<R: Rng>(rng: &mut R, n: usize) -> MixedStrategy {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    MixedStrategy::from_weights(&w).unwrap()
}

pub fn random_product<R: Rng>(rng: &mut R, p: usize, d: usize) -> ProductStrategy {
    ProductStrategy::new((0..p).map(|_| random_mixed(rng, d)).collect()).unwrap()
}

/// Probability of joint row `i` under `x`, from the digits of `i`.
pub fn joint_prob(x: &ProductStrategy, i: usize) -> f64 {
    let p = x.num_sensors();
    let d = x.num_orientations();
    let mut rest = i;
    let mut prob = 1.0;
    for q in (0..p).rev() {
        prob *= x.marginals()[q].probs()[rest % d];
        rest /= d;
    }
    prob
}

/// x^T A e_j for every j, by enumerating the dense matrix.
pub fn dense_column_payoffs(inst: &GameInstance, x: &ProductStrategy) -> Vec<f64> {
    let a = inst.dense().unwrap();
    let n = inst.num_paths();
    let m = inst.num_joint().unwrap();
    let mut out = vec![0.0; n];
    for i in 0..m {
        let w = joint_prob(x, i);
        for j in 0..n {
            out[j] += w * a[i * n + j];
        }
    }
    out
}

/// min_i e_i^T A y by enumeration, with the first minimizing row.
pub fn dense_row_min(inst: &GameInstance, y: &MixedStrategy) -> (f64, usize) {
    let a = inst.dense().unwrap();
    let n = inst.num_paths();
    let mut best = (f64::INFINITY, 0);
    for (i, row) in a.chunks(n).enumerate() {
        let v: f64 = row.iter().zip(y.probs()).map(|(a, y)| a * y).sum();
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

pub fn joint(orientations: &[usize], d: usize) -> JointStrategy {
    JointStrategy::encode(orientations.to_vec(), d).unwrap()
}

/// Two sensors, two orientations, four paths; V_bar = 3 and p_bar = 0.9.
pub fn two_sensor_game() -> GameInstance {
    let model = SensorModel {
        coverage: CoverageTensor::from_nested(&[
            vec![vec![2, 0, 1, 3], vec![0, 2, 2, 0]],
            vec![vec![1, 1, 0, 2], vec![3, 0, 1, 0]],
        ])
        .unwrap(),
        p_detect: vec![0.8, 0.6],
        p_bounds: vec![(0.1, 0.9), (0.1, 0.9)],
        orientation_costs: vec![vec![0.0, 0.5], vec![0.2, 0.0]],
    };
    GameInstance::from_model(model, vec![0.0, 0.3, 0.1, 0.2]).unwrap()
}

pub fn problem_for(label: &str, inst: &GameInstance) -> OnlineProblem {
    OnlineProblem::new(label, inst, &InnerSolver::default()).unwrap()
}

/// The 10 x 20 regret-study game drawn with `seed`.
pub fn regret_problem(seed: u64) -> OnlineProblem {
    let inst = generate_synthetic(&SyntheticSpec::regret_study(seed)).unwrap();
    problem_for(&format!("synthetic-{seed}"), &inst)
}
