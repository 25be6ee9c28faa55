use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::CoverageTensor;
use crate::error::{Error, Result};
use crate::payoff::{GameInstance, SensorModel};

/// Random single-sensor game with m defender rows and n paths:
/// V_ij uniform on an integer interval, one detection probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    pub v_range: (u32, u32),
    pub p_detect: f64,
    pub p_bounds: (f64, f64),
    /// c_i uniform on [0, row_cost_max]; zero when 0
    pub row_cost_max: f64,
    /// r_j uniform on [0, path_cost_max]; zero when 0
    pub path_cost_max: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            m: 10,
            n: 20,
            v_range: (10, 20),
            p_detect: 0.8,
            p_bounds: (0.1, 0.9),
            row_cost_max: 0.0,
            path_cost_max: 0.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    /// Setting of the regret experiments. With zero costs the estimated
    /// matrix is a positive multiple of the true one, so the learner
    /// would play an exact equilibrium from the first round; random
    /// costs make the estimate matter.
    pub fn regret_study(seed: u64) -> Self {
        SyntheticSpec { row_cost_max: 8.0, path_cost_max: 8.0, seed, ..SyntheticSpec::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::param("m/n", format!("need at least one row and one path, got {}x{}", self.m, self.n)));
        }
        let (lo, hi) = self.v_range;
        if lo > hi || hi > 1000 {
            return Err(Error::param("v_range", format!("need lo <= hi <= 1000, got [{lo}, {hi}]")));
        }
        let (pmin, pmax) = self.p_bounds;
        if !(0.0 < pmin && pmin < pmax && pmax < 1.0) {
            return Err(Error::param("p_bounds", format!("need 0 < p_min < p_max < 1, got ({pmin}, {pmax})")));
        }
        if !(pmin..=pmax).contains(&self.p_detect) {
            return Err(Error::param("p_detect", format!("{} outside [{pmin}, {pmax}]", self.p_detect)));
        }
        for (name, v) in [("row_cost_max", self.row_cost_max), ("path_cost_max", self.path_cost_max)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// Draws the instance; identical specs give identical games.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<GameInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.v_range;
    let mut coverage = CoverageTensor::zeros(1, spec.m, spec.n);
    for i in 0..spec.m {
        for j in 0..spec.n {
            coverage.set(0, i, j, rng.random_range(lo..=hi));
        }
    }
    let mut uniform = |max: f64| if max > 0.0 { rng.random_range(0.0..=max) } else { 0.0 };
    let row_costs: Vec<f64> = (0..spec.m).map(|_| uniform(spec.row_cost_max)).collect();
    let path_costs: Vec<f64> = (0..spec.n).map(|_| uniform(spec.path_cost_max)).collect();
    let model = SensorModel {
        coverage,
        p_detect: vec![spec.p_detect],
        p_bounds: vec![spec.p_bounds],
        orientation_costs: vec![row_costs],
    };
    GameInstance::from_model(model, path_costs)
}
