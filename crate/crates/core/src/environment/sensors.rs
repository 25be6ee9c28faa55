use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::environment::coverage::{compute_coverage, CoverageShape};
use crate::environment::grid::{Cell, Direction, GridEnvironment};
use crate::environment::paths::Path;
use crate::error::{Error, Result};

/// Detection parameters of one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    pub p_true: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl DetectionModel {
    pub fn new(p_true: f64, p_min: f64, p_max: f64) -> Result<Self> {
        let m = DetectionModel { p_true, p_min, p_max };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.p_min && self.p_min < self.p_max && self.p_max < 1.0) {
            return Err(Error::param(
                "p_bounds",
                format!("need 0 < p_min < p_max < 1, got ({}, {})", self.p_min, self.p_max),
            ));
        }
        if !(self.p_min..=self.p_max).contains(&self.p_true) {
            return Err(Error::param(
                "p_true",
                format!("{} outside [{}, {}]", self.p_true, self.p_min, self.p_max),
            ));
        }
        Ok(())
    }
}

impl Default for DetectionModel {
    fn default() -> Self {
        DetectionModel { p_true: 0.8, p_min: 0.1, p_max: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sensor {
    pub id: usize,
    pub cell: Cell,
    pub orientations: Vec<Direction>,
    pub coverage: Vec<BTreeSet<Cell>>,
    pub orientation_costs: Vec<f64>,
    pub detection: DetectionModel,
}

impl Sensor {
    /// Builds a sensor with one coverage footprint per orientation.
    pub fn build(
        env: &GridEnvironment,
        id: usize,
        cell: Cell,
        orientations: &[Direction],
        shape: CoverageShape,
        orientation_costs: Vec<f64>,
        detection: DetectionModel,
    ) -> Result<Self> {
        if orientation_costs.len() != orientations.len() {
            return Err(Error::Dimension(format!(
                "{} orientation costs for {} orientations",
                orientation_costs.len(),
                orientations.len()
            )));
        }
        if orientation_costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::param("orientation_costs", "costs must be finite and nonnegative"));
        }
        detection.validate()?;
        let coverage = orientations
            .iter()
            .map(|&dir| compute_coverage(env, cell, dir, shape))
            .collect::<Result<Vec<_>>>()?;
        Ok(Sensor { id, cell, orientations: orientations.to_vec(), coverage, orientation_costs, detection })
    }

    pub fn num_orientations(&self) -> usize {
        self.orientations.len()
    }
}

/// Coverage counts V[q][k][j] = |coverage(q, k) ∩ nodes(path j)|.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageTensor {
    sensors: usize,
    orientations: usize,
    paths: usize,
    counts: Vec<u32>,
}

impl CoverageTensor {
    pub fn zeros(sensors: usize, orientations: usize, paths: usize) -> Self {
        CoverageTensor { sensors, orientations, paths, counts: vec![0; sensors * orientations * paths] }
    }

    /// Builds from nested `[q][k][j]` counts.
    pub fn from_nested(nested: &[Vec<Vec<u32>>]) -> Result<Self> {
        let p = nested.len();
        let d = nested.first().map_or(0, |v| v.len());
        let n = nested.first().and_then(|v| v.first()).map_or(0, |v| v.len());
        let mut t = CoverageTensor::zeros(p, d, n);
        for (q, per_q) in nested.iter().enumerate() {
            if per_q.len() != d {
                return Err(Error::Dimension(format!("sensor {q} has {} orientations, expected {d}", per_q.len())));
            }
            for (k, row) in per_q.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Dimension(format!("row ({q},{k}) has {} paths, expected {n}", row.len())));
                }
                for (j, &v) in row.iter().enumerate() {
                    t.set(q, k, j, v);
                }
            }
        }
        Ok(t)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.sensors, self.orientations, self.paths)
    }

    #[inline]
    pub fn get(&self, q: usize, k: usize, j: usize) -> u32 {
        self.counts[(q * self.orientations + k) * self.paths + j]
    }

    pub fn set(&mut self, q: usize, k: usize, j: usize, v: u32) {
        self.counts[(q * self.orientations + k) * self.paths + j] = v;
    }

    /// Row of counts for sensor q in orientation k, over all paths.
    pub fn row(&self, q: usize, k: usize) -> &[u32] {
        let start = (q * self.orientations + k) * self.paths;
        &self.counts[start..start + self.paths]
    }

    /// V_{max,q} = max over (k, j) of V[q][k][j].
    pub fn max_for_sensor(&self, q: usize) -> u32 {
        (0..self.orientations).flat_map(|k| self.row(q, k).iter().copied()).max().unwrap_or(0)
    }
}

/// Intersects every sensor footprint with every path.
pub fn build_coverage_tensor(env: &GridEnvironment, sensors: &[Sensor], paths: &[Path]) -> Result<CoverageTensor> {
    let d = sensors.first().map_or(0, |s| s.num_orientations());
    if sensors.iter().any(|s| s.num_orientations() != d) {
        return Err(Error::Dimension("all sensors must share one orientation set".into()));
    }
    let mut tensor = CoverageTensor::zeros(sensors.len(), d, paths.len());
    for (q, sensor) in sensors.iter().enumerate() {
        for (k, footprint) in sensor.coverage.iter().enumerate() {
            let mask: Vec<bool> = {
                let mut m = vec![false; env.width() * env.height()];
                for c in footprint {
                    m[env.index(*c)] = true;
                }
                m
            };
            for (j, path) in paths.iter().enumerate() {
                let v = path.nodes.iter().filter(|&&node| mask[node]).count();
                tensor.set(q, k, j, v as u32);
            }
        }
    }
    Ok(tensor)
}
