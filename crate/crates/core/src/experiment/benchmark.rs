use serde::{Deserialize, Serialize};

use crate::environment::{EnvConfig, GridEnvironment};
use crate::error::{Error, Result};
use crate::experiment::scenario::grid_scenario;
use crate::payoff::GameInstance;
use crate::solvers::{solve, SolveResult, SolverKind};

/// Solver timing sweep over sensor counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub sensor_counts: Vec<usize>,
    /// target exploitability on the normalized game
    pub eps: f64,
    /// overrides the iteration count derived from `eps`
    pub iterations: Option<u64>,
    /// timing repeats; the median is reported
    pub repeats: usize,
    /// largest joint strategy count for the exact solver
    pub exact_limit: usize,
    /// largest m * n for Weighted Majority
    pub wm_limit: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            sensor_counts: vec![2, 3, 4, 5, 6, 7, 8],
            eps: 0.001,
            iterations: None,
            repeats: 3,
            exact_limit: 1024,
            wm_limit: crate::payoff::DEFAULT_DENSE_LIMIT,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::param("eps", format!("must be positive, got {}", self.eps)));
        }
        if self.repeats == 0 {
            return Err(Error::param("repeats", "must be at least 1"));
        }
        Ok(())
    }
}

/// One row of the timing table. Absent cells were skipped as too large.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub sensors: usize,
    /// m = d^p
    pub strategy_space: u128,
    pub iterations: u64,
    pub exact_s: Option<f64>,
    pub wm_s: Option<f64>,
    pub dwm_s: Option<f64>,
    /// achieved gaps on the normalized game
    pub gap_exact: Option<f64>,
    pub gap_wm: Option<f64>,
    pub gap_dwm: Option<f64>,
    /// A_max - A_min, to convert gaps to the raw scale
    pub payoff_range: f64,
}

fn timed(inst: &GameInstance, kind: SolverKind, cfg: &BenchmarkConfig) -> Result<(f64, SolveResult)> {
    let mut times = Vec::with_capacity(cfg.repeats);
    let mut last = None;
    for _ in 0..cfg.repeats {
        let r = solve(inst, kind, cfg.eps, cfg.iterations, None)?;
        times.push(r.wall_time);
        last = Some(r);
    }
    times.sort_by(f64::total_cmp);
    Ok((times[times.len() / 2], last.expect("at least one repeat")))
}

/// Times every solver on each (sensor count, instance) pair.
pub fn run_benchmark_on(instances: &[(usize, GameInstance)], cfg: &BenchmarkConfig) -> Result<Vec<BenchmarkRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(instances.len());
    for (sensors, inst) in instances {
        let inst = inst.normalize()?;
        let (p, d, n) = inst.dims();
        let m = (d as u128).checked_pow(p as u32).unwrap_or(u128::MAX);
        let (iterations, _) = crate::solvers::schedule(&inst, cfg.eps, cfg.iterations, None)?;
        let mut row = BenchmarkRow {
            sensors: *sensors,
            strategy_space: m,
            iterations,
            exact_s: None,
            wm_s: None,
            dwm_s: None,
            gap_exact: None,
            gap_wm: None,
            gap_dwm: None,
            payoff_range: inst.normalization().expect("normalized").range(),
        };
        let dense_ok = m.saturating_mul(n as u128) <= inst.dense_limit() as u128;
        if dense_ok && m <= cfg.exact_limit as u128 {
            let (t, r) = timed(&inst, SolverKind::Exact, cfg)?;
            row.exact_s = Some(t);
            row.gap_exact = Some(r.gap);
        }
        if dense_ok && m.saturating_mul(n as u128) <= cfg.wm_limit as u128 {
            let (t, r) = timed(&inst, SolverKind::Wm, cfg)?;
            row.wm_s = Some(t);
            row.gap_wm = Some(r.gap);
        }
        let (t, r) = timed(&inst, SolverKind::Dwm, cfg)?;
        row.dwm_s = Some(t);
        row.gap_dwm = Some(r.gap);
        log::info!("benchmark |S|={sensors}: exact {:?} wm {:?} dwm {:?}", row.exact_s, row.wm_s, row.dwm_s);
        rows.push(row);
    }
    Ok(rows)
}

/// Builds the grid game for every configured sensor count and times the
/// solvers. Instance construction is not timed.
pub fn run_benchmark(env: &GridEnvironment, env_cfg: &EnvConfig, cfg: &BenchmarkConfig) -> Result<Vec<BenchmarkRow>> {
    let instances = cfg
        .sensor_counts
        .iter()
        .map(|&s| Ok((s, grid_scenario(env, env_cfg, Some(s))?.instance)))
        .collect::<Result<Vec<_>>>()?;
    run_benchmark_on(&instances, cfg)
}
