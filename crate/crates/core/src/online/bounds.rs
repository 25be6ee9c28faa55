use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which opponent the homogeneous regret bound is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCase {
    /// The intruder plays an equilibrium strategy of the true game.
    EquilibriumOpponent,
    /// Any other intruder behaviour.
    Other,
}

impl BoundCase {
    fn coefficient(self) -> f64 {
        match self {
            BoundCase::EquilibriumOpponent => 5.0 * std::f64::consts::SQRT_2,
            BoundCase::Other => 2.0 * std::f64::consts::SQRT_2,
        }
    }
}

/// High-probability regret bound of the clipped-estimator learner:
/// coef * V_max / (1 - p_max) * sqrt(T ln(2T / alpha)).
pub fn regret_bound_homogeneous(t: u64, alpha: f64, v_max: f64, p_max: f64, case: BoundCase) -> Result<f64> {
    if t == 0 {
        return Err(Error::param("T", "must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if !(p_max > 0.0 && p_max < 1.0) {
        return Err(Error::param("p_max", format!("must lie in (0, 1), got {p_max}")));
    }
    if !(v_max >= 0.0 && v_max.is_finite()) {
        return Err(Error::param("v_max", format!("must be finite and nonnegative, got {v_max}")));
    }
    let t = t as f64;
    Ok(case.coefficient() * v_max / (1.0 - p_max) * (t * (2.0 * t / alpha).ln()).sqrt())
}

/// Formula of the UCB regret bound without its precondition check.
pub(crate) fn ucb_bound_formula(t: u64, p: usize, d: usize, n: usize, v_bar: f64, p_bar: f64) -> f64 {
    let c = v_bar / (1.0 - p_bar);
    let (t, pdn) = (t as f64, (p * d * n) as f64);
    1.0 + c * p as f64 * (2.0 * (d * n) as f64 * t * (4.0 * t * t * pdn).ln()).sqrt()
}

/// Regret bound of the UCB learner:
/// 1 + C p sqrt(2 d n T ln(4 T^2 p d n)), C = V_bar / (1 - p_bar).
pub fn ucb_regret_bound(t: u64, p: usize, d: usize, n: usize, v_bar: f64, p_bar: f64) -> Result<f64> {
    let pdn = p * d * n;
    if pdn < 2 || (t as usize) < pdn {
        return Err(Error::param("T", format!("need T >= p d n >= 2, got T = {t}, p d n = {pdn}")));
    }
    if !(p_bar > 0.0 && p_bar < 1.0) {
        return Err(Error::param("p_max", format!("must lie in (0, 1), got {p_bar}")));
    }
    Ok(ucb_bound_formula(t, p, d, n, v_bar, p_bar))
}

/// Confidence radius delta = 1 / (2 T^2 p d n).
pub fn ucb_delta(t: u64, p: usize, d: usize, n: usize) -> f64 {
    1.0 / (2.0 * (t as f64).powi(2) * (p * d * n) as f64)
}
