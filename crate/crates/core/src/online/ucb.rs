use crate::error::{Error, Result};
use crate::online::estimator::EstimatorState;
use crate::payoff::GameInstance;

/// Dense Ā (empirical payoffs) and the confidence bonus of every
/// (i, j) entry, both row-major m x n.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbComponents {
    pub rows: usize,
    pub cols: usize,
    pub mean: Vec<f64>,
    pub bonus: Vec<f64>,
}

impl UcbComponents {
    /// Ã = Ā + bonus, an upper confidence bound on A.
    pub fn upper(&self) -> Vec<f64> {
        self.mean.iter().zip(&self.bonus).map(|(a, b)| a + b).collect()
    }

    /// Ā - bonus, an optimistic matrix for the minimizing defender.
    pub fn lower(&self) -> Vec<f64> {
        self.mean.iter().zip(&self.bonus).map(|(a, b)| a - b).collect()
    }

    pub fn min_bonus(&self) -> f64 {
        self.bonus.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Per-sensor constant V_max,l / (1 - p_max,l).
pub fn sensor_scales(template: &GameInstance) -> Result<Vec<f64>> {
    let model = template.model().ok_or(Error::NoSensorModel)?;
    Ok((0..template.num_sensors())
        .map(|l| model.coverage.max_for_sensor(l) as f64 / (1.0 - model.p_bounds[l].1))
        .collect())
}

/// Bonus term of one sensor after `count` observations.
pub fn bonus_term(scale: f64, delta: f64, count: u64) -> f64 {
    scale * ((2.0 / delta).ln() / (2.0 * count.max(1) as f64)).sqrt()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Empirical matrix from the clipped per-sensor estimates, and the bonus
/// sum_l scale_l sqrt(ln(2/delta) / (2 max(1, n_ij,l))) scaled by
/// `bonus_scale`.
pub fn ucb_components(
    est: &EstimatorState,
    template: &GameInstance,
    delta: f64,
    p_hat: &[f64],
    bonus_scale: f64,
) -> Result<UcbComponents> {
    check_delta(delta)?;
    let mean_inst = template.denormalized().with_detection(p_hat)?;
    let mean = mean_inst.dense()?.to_vec();
    let rows = template.num_joint()?;
    let cols = template.num_paths();
    let scales = sensor_scales(template)?;
    let unvisited: f64 = scales.iter().map(|&s| bonus_term(s, delta, 0)).sum::<f64>() * bonus_scale;
    let mut bonus = vec![unvisited; rows * cols];
    for (&(i, j), counts) in est.visited_pairs() {
        bonus[i * cols + j] =
            scales.iter().zip(counts).map(|(&s, &c)| bonus_term(s, delta, c)).sum::<f64>() * bonus_scale;
    }
    Ok(UcbComponents { rows, cols, mean, bonus })
}

/// Ã^t as a plain matrix game (one player row per joint strategy).
pub fn ucb_matrix(est: &EstimatorState, template: &GameInstance, delta: f64) -> Result<GameInstance> {
    let model = template.model().ok_or(Error::NoSensorModel)?;
    let p_hat = est.sensor_estimates(&model.p_bounds);
    let parts = ucb_components(est, template, delta, &p_hat, 1.0)?;
    GameInstance::from_matrix(parts.rows, parts.cols, parts.upper())
}
