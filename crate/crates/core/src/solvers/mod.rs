//! Equilibrium computation: exact LP, Weighted Majority over joint
//! strategies, and the distributed per-sensor variant.

mod bounds;
mod dwm;
mod gap;
mod simplex;
mod wm;

pub use bounds::{dwm_beta, epsilon_bound, iterations_for_epsilon};
pub use dwm::{dwm_solve, dwm_solve_with, per_sensor_loss, per_sensor_loss_raw, DwmOptions, DwmState};
pub use gap::{defender_column_payoffs, expected_payoff, exploitability_gap};
pub use simplex::{solve_exact, solve_matrix_game};
pub use wm::{wm_solve, WeightedMajority};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::payoff::{DefenderStrategy, GameInstance, MixedStrategy};

/// Averaged strategies and diagnostics of one solve. `gap` and
/// `value_estimate` are on the instance's solver scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub defender: DefenderStrategy,
    pub intruder: MixedStrategy,
    pub value_estimate: f64,
    pub gap: f64,
    pub iterations: u64,
    pub beta: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Wm,
    Dwm,
}

impl std::str::FromStr for SolverKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "lp" => Ok(SolverKind::Exact),
            "wm" => Ok(SolverKind::Wm),
            "dwm" => Ok(SolverKind::Dwm),
            other => Err(crate::Error::param("solver", format!("unknown solver {other:?}; expected exact, wm or dwm"))),
        }
    }
}

/// Iteration count and rate for the iterative solvers: T is the
/// smallest horizon whose bound meets `eps` (with L = T) unless
/// overridden, and beta follows from L = T unless overridden.
pub fn schedule(inst: &GameInstance, eps: f64, iterations: Option<u64>, beta: Option<f64>) -> Result<(u64, f64)> {
    let (p, d, _) = inst.dims();
    let t = match iterations {
        Some(t) => t,
        None => iterations_for_epsilon(eps, p, d)?,
    };
    let beta = match beta {
        Some(b) => b,
        None => dwm_beta(t.max(1) as f64, p, d)?,
    };
    Ok((t, beta))
}

/// Runs one solver with the theoretical schedule for `eps`. WM over the
/// d^p joint strategies has ln(d^p) = p ln d, so both iterative solvers
/// share one schedule.
pub fn solve(inst: &GameInstance, kind: SolverKind, eps: f64, iterations: Option<u64>, beta: Option<f64>) -> Result<SolveResult> {
    match kind {
        SolverKind::Exact => solve_exact(inst),
        SolverKind::Wm => {
            let (t, beta) = schedule(inst, eps, iterations, beta)?;
            wm_solve(inst, beta, t)
        }
        SolverKind::Dwm => {
            let (t, beta) = schedule(inst, eps, iterations, beta)?;
            dwm_solve(inst, beta, t)
        }
    }
}
