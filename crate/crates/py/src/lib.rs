//! Python bindings: build games, solve them and run the online learners.

use std::collections::HashMap;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use sensorsched::experiment::{
    generate_synthetic, nine_room_instance, run_online_experiment, OnlineExperiment, SyntheticSpec,
};
use sensorsched::online::{
    run_heterogeneous, run_homogeneous, regret_bound_homogeneous, ucb_regret_bound, BoundCase, HeterogeneousConfig,
    HomogeneousConfig, LearnerKind, OnlineProblem, OnlineTrace, PolicySpec,
};
use sensorsched::payoff::{load_instance, save_instance, DefenderStrategy, JointStrategy};
use sensorsched::solvers::{self, SolverKind};
use sensorsched::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A sensor-scheduling game (defender rows minimize, intruder columns maximize).
#[pyclass(name = "GameInstance", module = "pysensorsched")]
struct PyGameInstance {
    inner: sensorsched::GameInstance,
}

#[pymethods]
impl PyGameInstance {
    /// Game of the built-in nine-room map with the first `sensors` sensors.
    #[staticmethod]
    fn nine_room(sensors: usize) -> PyResult<Self> {
        Ok(PyGameInstance { inner: nine_room_instance(sensors).map_err(to_py)? })
    }

    /// Random single-sensor game with `m` rows and `n` paths.
    #[staticmethod]
    #[pyo3(signature = (m=10, n=20, seed=0, v_range=(10, 20), p_detect=0.8, p_bounds=(0.1, 0.9), row_cost_max=0.0, path_cost_max=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn synthetic(
        m: usize,
        n: usize,
        seed: u64,
        v_range: (u32, u32),
        p_detect: f64,
        p_bounds: (f64, f64),
        row_cost_max: f64,
        path_cost_max: f64,
    ) -> PyResult<Self> {
        let spec = SyntheticSpec { m, n, v_range, p_detect, p_bounds, row_cost_max, path_cost_max, seed };
        Ok(PyGameInstance { inner: generate_synthetic(&spec).map_err(to_py)? })
    }

    /// Plain matrix game from a list of rows.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyGameInstance { inner: sensorsched::GameInstance::from_rows(&rows).map_err(to_py)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyGameInstance { inner: load_instance(path).map_err(to_py)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_instance(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn sensors(&self) -> usize {
        self.inner.num_sensors()
    }

    #[getter]
    fn orientations(&self) -> usize {
        self.inner.num_orientations()
    }

    #[getter]
    fn paths(&self) -> usize {
        self.inner.num_paths()
    }

    /// Number of joint orientations d**p.
    #[getter]
    fn rows(&self) -> PyResult<usize> {
        self.inner.num_joint().map_err(to_py)
    }

    #[getter]
    fn is_normalized(&self) -> bool {
        self.inner.normalization().is_some()
    }

    /// Copy with payoffs mapped affinely onto [0, 1].
    fn normalize(&self) -> PyResult<Self> {
        Ok(PyGameInstance { inner: self.inner.normalize().map_err(to_py)? })
    }

    fn denormalized(&self) -> Self {
        PyGameInstance { inner: self.inner.denormalized() }
    }

    /// (min, max) of the payoff entries on the current scale.
    fn bounds(&self) -> (f64, f64) {
        self.inner.effective_bounds()
    }

    /// Payoff of the joint orientation (one index per sensor) against path `j`.
    fn entry(&self, orientations: Vec<usize>, j: usize) -> PyResult<f64> {
        let i = JointStrategy::encode(orientations, self.inner.num_orientations()).map_err(to_py)?;
        self.inner.payoff_entry(&i, j).map_err(to_py)
    }

    /// Full payoff matrix as a list of rows.
    fn dense(&self) -> PyResult<Vec<Vec<f64>>> {
        let cols = self.inner.num_paths();
        let flat = self.inner.dense().map_err(to_py)?;
        Ok(flat.chunks(cols).map(<[f64]>::to_vec).collect())
    }

    fn __repr__(&self) -> String {
        let (p, d, n) = self.inner.dims();
        format!("GameInstance(sensors={p}, orientations={d}, paths={n}, normalized={})", self.is_normalized())
    }
}

/// Strategies and diagnostics returned by `solve`.
#[pyclass(name = "SolveResult", module = "pysensorsched", get_all)]
struct PySolveResult {
    /// estimated game value (on the instance's scale)
    value: f64,
    gap: f64,
    iterations: u64,
    beta: Option<f64>,
    wall_time: f64,
    /// per-sensor orientation marginals (DWM), or None
    marginals: Option<Vec<Vec<f64>>>,
    /// probabilities over joint orientations
    defender: Vec<f64>,
    intruder: Vec<f64>,
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!("SolveResult(value={:.6}, gap={:.3e}, iterations={})", self.value, self.gap, self.iterations)
    }
}

/// Solves `game` with `solver` in {"exact", "wm", "dwm"}. WM and DWM need
/// a normalized game.
#[pyfunction]
#[pyo3(signature = (game, solver="dwm", eps=1e-3, iterations=None, beta=None))]
fn solve(game: &PyGameInstance, solver: &str, eps: f64, iterations: Option<u64>, beta: Option<f64>) -> PyResult<PySolveResult> {
    let kind: SolverKind = solver.parse().map_err(to_py)?;
    let res = solvers::solve(&game.inner, kind, eps, iterations, beta).map_err(to_py)?;
    let marginals = match &res.defender {
        DefenderStrategy::Product(x) => Some(x.marginals().iter().map(|m| m.probs().to_vec()).collect()),
        DefenderStrategy::Joint(_) => None,
    };
    let joint = match &res.defender {
        DefenderStrategy::Joint(x) => x.probs().to_vec(),
        DefenderStrategy::Product(_) if game.inner.is_materializable() => {
            res.defender.to_joint().map_err(to_py)?.probs().to_vec()
        }
        DefenderStrategy::Product(_) => Vec::new(),
    };
    Ok(PySolveResult {
        value: res.value_estimate,
        gap: res.gap,
        iterations: res.iterations,
        beta: res.beta,
        wall_time: res.wall_time,
        marginals,
        defender: joint,
        intruder: res.intruder.probs().to_vec(),
    })
}

/// Smallest horizon T whose DWM accuracy bound meets `eps`.
#[pyfunction]
fn iterations_for_epsilon(eps: f64, sensors: usize, orientations: usize) -> PyResult<u64> {
    solvers::iterations_for_epsilon(eps, sensors, orientations).map_err(to_py)
}

#[pyfunction]
fn dwm_beta(horizon: f64, sensors: usize, orientations: usize) -> PyResult<f64> {
    solvers::dwm_beta(horizon, sensors, orientations).map_err(to_py)
}

#[pyfunction]
fn epsilon_bound(t: u64, horizon: f64, sensors: usize, orientations: usize) -> PyResult<f64> {
    solvers::epsilon_bound(t, horizon, sensors, orientations).map_err(to_py)
}

/// Regret bound of the homogeneous learner; `equilibrium_opponent`
/// selects the tighter constant.
#[pyfunction]
#[pyo3(signature = (t, alpha, v_max, p_max, equilibrium_opponent=true))]
fn homogeneous_regret_bound(t: u64, alpha: f64, v_max: f64, p_max: f64, equilibrium_opponent: bool) -> PyResult<f64> {
    let case = if equilibrium_opponent { BoundCase::EquilibriumOpponent } else { BoundCase::Other };
    regret_bound_homogeneous(t, alpha, v_max, p_max, case).map_err(to_py)
}

#[pyfunction]
fn heterogeneous_regret_bound(t: u64, sensors: usize, orientations: usize, paths: usize, v_max: f64, p_max: f64) -> PyResult<f64> {
    ucb_regret_bound(t, sensors, orientations, paths, v_max, p_max).map_err(to_py)
}

fn learner(kind: &str) -> PyResult<LearnerKind> {
    match kind {
        "homogeneous" | "hom" => Ok(LearnerKind::Homogeneous),
        "heterogeneous" | "het" => Ok(LearnerKind::Heterogeneous),
        _ => Err(PyValueError::new_err(format!("unknown learner {kind:?}; expected homogeneous or heterogeneous"))),
    }
}

fn trace_dict(trace: &OnlineTrace) -> HashMap<String, Vec<f64>> {
    HashMap::from([
        ("cumulative".to_string(), trace.cumulative()),
        ("regret".to_string(), trace.rounds.iter().map(|r| r.regret).collect()),
        ("payoff".to_string(), trace.rounds.iter().map(|r| r.payoff).collect()),
        ("path".to_string(), trace.rounds.iter().map(|r| r.j as f64).collect()),
        ("p_hat_last".to_string(), trace.rounds.last().map(|r| r.p_hat.clone()).unwrap_or_default()),
    ])
}

/// One online run on a sensor game (raw payoffs). Returns per-round
/// arrays, the game value and the final regret bound.
#[pyfunction]
#[pyo3(signature = (game, learner="homogeneous", policy="ne", rounds=1000, seed=0))]
fn run_online(
    game: &PyGameInstance,
    learner: &str,
    policy: &str,
    rounds: u64,
    seed: u64,
) -> PyResult<(HashMap<String, Vec<f64>>, f64, f64)> {
    let kind = self::learner(learner)?;
    let spec: PolicySpec = policy.parse().map_err(to_py)?;
    let hom = HomogeneousConfig::default();
    let het = HeterogeneousConfig::default();
    let problem = OnlineProblem::new("python", &game.inner, &hom.inner).map_err(to_py)?;
    let policy = problem.policy(spec);
    let trace = match kind {
        LearnerKind::Homogeneous => run_homogeneous(&problem, &policy, rounds, seed, &hom),
        LearnerKind::Heterogeneous => run_heterogeneous(&problem, &policy, rounds, seed, &het),
    }
    .map_err(to_py)?;
    Ok((trace_dict(&trace), problem.value, trace.bound))
}

/// Seeded repetitions against several policies. Returns
/// {policy: {"mean": [...], "std": [...], "bound": [...]}}.
#[pyfunction]
#[pyo3(signature = (game, learner="homogeneous", policies=vec!["ne".to_string(), "random".to_string()], rounds=1000, runs=20, master_seed=0, threads=None))]
fn run_experiment(
    game: &PyGameInstance,
    learner: &str,
    policies: Vec<String>,
    rounds: u64,
    runs: usize,
    master_seed: u64,
    threads: Option<usize>,
) -> PyResult<HashMap<String, HashMap<String, Vec<f64>>>> {
    let cfg = OnlineExperiment {
        kind: self::learner(learner)?,
        rounds,
        runs,
        master_seed,
        policies: policies.iter().map(|p| p.parse()).collect::<Result<_, _>>().map_err(to_py)?,
        threads,
        ..OnlineExperiment::default()
    };
    let problem = OnlineProblem::new("python", &game.inner, &cfg.homogeneous.inner).map_err(to_py)?;
    let curves = run_online_experiment(&problem, &cfg).map_err(to_py)?;
    Ok(curves
        .into_iter()
        .map(|c| {
            let stats = HashMap::from([("mean".to_string(), c.mean), ("std".to_string(), c.std), ("bound".to_string(), c.bound)]);
            (c.policy, stats)
        })
        .collect())
}

#[pymodule]
fn pysensorsched(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGameInstance>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(iterations_for_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(dwm_beta, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_bound, m)?)?;
    m.add_function(wrap_pyfunction!(homogeneous_regret_bound, m)?)?;
    m.add_function(wrap_pyfunction!(heterogeneous_regret_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_online, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
