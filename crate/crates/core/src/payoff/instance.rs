use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::environment::CoverageTensor;
use crate::error::{Error, Result};
use crate::payoff::strategy::{joint_count, JointStrategy, MixedStrategy, ProductStrategy};

/// Largest m*n for which the full payoff matrix is materialized.
pub const DEFAULT_DENSE_LIMIT: usize = 262_144;

/// The physical model behind a game: coverage counts, detection
/// probabilities and their known bounds, orientation costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub coverage: CoverageTensor,
    pub p_detect: Vec<f64>,
    pub p_bounds: Vec<(f64, f64)>,
    /// c[q][k]
    pub orientation_costs: Vec<Vec<f64>>,
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        let (p, d, _) = self.coverage.dims();
        if self.p_detect.len() != p || self.p_bounds.len() != p || self.orientation_costs.len() != p {
            return Err(Error::Dimension(format!(
                "model for {p} sensors has {} detection probabilities, {} bounds, {} cost rows",
                self.p_detect.len(),
                self.p_bounds.len(),
                self.orientation_costs.len()
            )));
        }
        for (q, costs) in self.orientation_costs.iter().enumerate() {
            if costs.len() != d {
                return Err(Error::Dimension(format!("sensor {q} has {} costs, expected {d}", costs.len())));
            }
        }
        for (q, (&pd, &(lo, hi))) in self.p_detect.iter().zip(&self.p_bounds).enumerate() {
            if !(0.0 < lo && lo < hi && hi < 1.0) {
                return Err(Error::param("p_bounds", format!("sensor {q}: need 0 < p_min < p_max < 1, got ({lo}, {hi})")));
            }
            if !(0.0..1.0).contains(&pd) {
                return Err(Error::param("p_detect", format!("sensor {q}: {pd} not in [0, 1)")));
            }
        }
        Ok(())
    }

    /// A^q_{kj} = V^q_{kj} ln(1 - p_q) + c^q_k, flattened as [q][k][j].
    fn subgames(&self) -> Vec<f64> {
        let (p, d, n) = self.coverage.dims();
        let mut out = Vec::with_capacity(p * d * n);
        for q in 0..p {
            let log_miss = (1.0 - self.p_detect[q]).ln();
            for k in 0..d {
                let c = self.orientation_costs[q][k];
                out.extend(self.coverage.row(q, k).iter().map(|&v| v as f64 * log_miss + c));
            }
        }
        out
    }
}

/// Affine map applied to raw payoffs: (a - min) / (max - min).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub min: f64,
    pub max: f64,
}

impl Normalization {
    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    #[inline]
    pub fn apply(&self, raw: f64) -> f64 {
        (raw - self.min) / (self.max - self.min)
    }

    #[inline]
    pub fn invert(&self, normalized: f64) -> f64 {
        self.min + normalized * (self.max - self.min)
    }
}

/// A zero-sum sensor scheduling game in factorized form.
///
/// The defender (row player, minimizer) picks one orientation per sensor;
/// the intruder (column player, maximizer) picks a path. The payoff
/// `A_ij = sum_q A^q[k_q(i)][j] - r_j` is never stored unless requested
/// through [`GameInstance::dense`].
#[derive(Debug, Clone)]
pub struct GameInstance {
    sensors: usize,
    orientations: usize,
    paths: usize,
    subgames: Vec<f64>,
    path_costs: Vec<f64>,
    model: Option<SensorModel>,
    normalization: Option<Normalization>,
    dense_limit: usize,
    dense: OnceLock<Vec<f64>>,
}

impl PartialEq for GameInstance {
    fn eq(&self, other: &Self) -> bool {
        self.dims() == other.dims()
            && self.subgames == other.subgames
            && self.path_costs == other.path_costs
            && self.model == other.model
            && self.normalization == other.normalization
    }
}

impl GameInstance {
    pub fn from_model(model: SensorModel, path_costs: Vec<f64>) -> Result<Self> {
        model.validate()?;
        let (p, d, n) = model.coverage.dims();
        let subgames = model.subgames();
        let mut inst = Self::from_subgames(p, d, n, subgames, path_costs)?;
        inst.model = Some(model);
        Ok(inst)
    }

    /// Builds from raw sub-game matrices flattened as `[q][k][j]`.
    pub fn from_subgames(p: usize, d: usize, n: usize, subgames: Vec<f64>, path_costs: Vec<f64>) -> Result<Self> {
        if p == 0 || d == 0 || n == 0 {
            return Err(Error::Dimension(format!("empty game ({p} sensors, {d} orientations, {n} paths)")));
        }
        if subgames.len() != p * d * n {
            return Err(Error::Dimension(format!("expected {} sub-game entries, got {}", p * d * n, subgames.len())));
        }
        if path_costs.len() != n {
            return Err(Error::Dimension(format!("expected {n} path costs, got {}", path_costs.len())));
        }
        if subgames.iter().chain(&path_costs).any(|v| !v.is_finite()) {
            return Err(Error::param("payoffs", "entries must be finite"));
        }
        Ok(GameInstance {
            sensors: p,
            orientations: d,
            paths: n,
            subgames,
            path_costs,
            model: None,
            normalization: None,
            dense_limit: DEFAULT_DENSE_LIMIT,
            dense: OnceLock::new(),
        })
    }

    /// A plain m x n matrix game (row-major), represented as one sensor
    /// with m orientations and zero path costs.
    pub fn from_matrix(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        Self::from_subgames(1, rows, cols, entries, vec![0.0; cols])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged matrix".into()));
        }
        Self::from_matrix(rows.len(), cols, rows.concat())
    }

    pub fn with_dense_limit(mut self, limit: usize) -> Self {
        self.dense_limit = limit;
        self.dense = OnceLock::new();
        self
    }

    pub fn dense_limit(&self) -> usize {
        self.dense_limit
    }

    /// (sensors p, orientations d, paths n)
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.sensors, self.orientations, self.paths)
    }

    pub fn num_sensors(&self) -> usize {
        self.sensors
    }

    pub fn num_orientations(&self) -> usize {
        self.orientations
    }

    pub fn num_paths(&self) -> usize {
        self.paths
    }

    /// m = d^p
    pub fn num_joint(&self) -> Result<usize> {
        joint_count(self.sensors, self.orientations)
    }

    /// True when the dense m x n matrix fits under the dense limit.
    pub fn is_materializable(&self) -> bool {
        self.num_joint().is_ok_and(|m| m.checked_mul(self.paths).is_some_and(|e| e <= self.dense_limit))
    }

    pub fn model(&self) -> Option<&SensorModel> {
        self.model.as_ref()
    }

    pub fn normalization(&self) -> Option<Normalization> {
        self.normalization
    }

    pub fn path_costs(&self) -> &[f64] {
        &self.path_costs
    }

    /// Raw sub-game row A^q[k][.] over all paths.
    #[inline]
    pub fn subgame_row(&self, q: usize, k: usize) -> &[f64] {
        let start = (q * self.orientations + k) * self.paths;
        &self.subgames[start..start + self.paths]
    }

    pub fn subgame(&self, q: usize, k: usize, j: usize) -> f64 {
        self.subgame_row(q, k)[j]
    }

    pub fn subgames_flat(&self) -> &[f64] {
        &self.subgames
    }

    /// Maps a raw payoff to the scale the solvers see.
    #[inline]
    pub fn to_effective(&self, raw: f64) -> f64 {
        match self.normalization {
            Some(norm) => norm.apply(raw),
            None => raw,
        }
    }

    fn check_joint(&self, i: &JointStrategy) -> Result<()> {
        if i.orientations().len() != self.sensors {
            return Err(Error::Dimension(format!(
                "joint strategy has {} sensors, game has {}",
                i.orientations().len(),
                self.sensors
            )));
        }
        if let Some(&k) = i.orientations().iter().find(|&&k| k >= self.orientations) {
            return Err(Error::OutOfRange { what: "orientation", index: k, size: self.orientations });
        }
        Ok(())
    }

    fn check_path(&self, j: usize) -> Result<()> {
        if j >= self.paths {
            return Err(Error::OutOfRange { what: "path", index: j, size: self.paths });
        }
        Ok(())
    }

    /// Unnormalized A_ij.
    pub fn raw_entry(&self, i: &JointStrategy, j: usize) -> Result<f64> {
        self.check_joint(i)?;
        self.check_path(j)?;
        let s: f64 = i.orientations().iter().enumerate().map(|(q, &k)| self.subgame(q, k, j)).sum();
        Ok(s - self.path_costs[j])
    }

    /// A_ij on the solver scale (normalized when a normalization is set).
    pub fn payoff_entry(&self, i: &JointStrategy, j: usize) -> Result<f64> {
        Ok(self.to_effective(self.raw_entry(i, j)?))
    }

    /// c_i = sum_q c^q_{k_q}
    pub fn joint_cost(&self, i: &JointStrategy) -> Result<f64> {
        let model = self.model.as_ref().ok_or(Error::NoSensorModel)?;
        self.check_joint(i)?;
        Ok(i.orientations().iter().enumerate().map(|(q, &k)| model.orientation_costs[q][k]).sum())
    }

    /// V^q_{ij} summed over sensors.
    pub fn total_coverage(&self, i: &JointStrategy, j: usize) -> Result<u32> {
        let model = self.model.as_ref().ok_or(Error::NoSensorModel)?;
        self.check_joint(i)?;
        self.check_path(j)?;
        Ok(i.orientations().iter().enumerate().map(|(q, &k)| model.coverage.get(q, k, j)).sum())
    }

    /// ln p_miss(i, j) = sum_q V^q_{ij} ln(1 - p_q)
    pub fn log_p_miss(&self, i: &JointStrategy, j: usize) -> Result<f64> {
        let model = self.model.as_ref().ok_or(Error::NoSensorModel)?;
        self.check_joint(i)?;
        self.check_path(j)?;
        Ok(i.orientations()
            .iter()
            .enumerate()
            .map(|(q, &k)| model.coverage.get(q, k, j) as f64 * (1.0 - model.p_detect[q]).ln())
            .sum())
    }

    /// Probability the intruder on path j crosses every covering sensor
    /// undetected.
    pub fn p_miss(&self, i: &JointStrategy, j: usize) -> Result<f64> {
        Ok(self.log_p_miss(i, j)?.exp())
    }

    /// Exact (min, max) of the raw payoff over all (i, j). For a fixed
    /// path the extremes over joint strategies decompose per sensor.
    pub fn raw_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..self.paths {
            let mut smin = -self.path_costs[j];
            let mut smax = -self.path_costs[j];
            for q in 0..self.sensors {
                let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
                for k in 0..self.orientations {
                    let v = self.subgame(q, k, j);
                    mn = mn.min(v);
                    mx = mx.max(v);
                }
                smin += mn;
                smax += mx;
            }
            lo = lo.min(smin);
            hi = hi.max(smax);
        }
        (lo, hi)
    }

    /// (min, max) of the payoffs on the solver scale.
    pub fn effective_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.raw_bounds();
        (self.to_effective(lo), self.to_effective(hi))
    }

    /// Returns a copy whose payoffs are affinely mapped onto [0, 1].
    pub fn normalize(&self) -> Result<Self> {
        let (min, max) = self.raw_bounds();
        let scale = min.abs().max(max.abs()).max(1.0);
        if (max - min).is_nan() || max - min <= 1e-12 * scale {
            return Err(Error::DegeneratePayoffRange { min, max });
        }
        let mut out = self.clone();
        out.normalization = Some(Normalization { min, max });
        out.dense = OnceLock::new();
        Ok(out)
    }

    /// Same game without the normalization.
    pub fn denormalized(&self) -> Self {
        let mut out = self.clone();
        out.normalization = None;
        out.dense = OnceLock::new();
        out
    }

    /// Errors unless every payoff on the solver scale lies in [0, 1].
    pub fn require_unit_range(&self) -> Result<()> {
        let (lo, hi) = self.effective_bounds();
        if lo < -1e-12 || hi > 1.0 + 1e-12 {
            return Err(Error::NotNormalized { min: lo, max: hi });
        }
        Ok(())
    }

    fn check_product(&self, x: &ProductStrategy) -> Result<()> {
        if x.num_sensors() != self.sensors || x.num_orientations() != self.orientations {
            return Err(Error::Dimension(format!(
                "product strategy is {}x{}, game is {}x{}",
                x.num_sensors(),
                x.num_orientations(),
                self.sensors,
                self.orientations
            )));
        }
        Ok(())
    }

    /// x^T A e_j for every path j, in O(p d n).
    pub fn column_payoffs(&self, x: &ProductStrategy) -> Result<Vec<f64>> {
        self.check_product(x)?;
        let mut acc: Vec<f64> = self.path_costs.iter().map(|r| -r).collect();
        for (q, marginal) in x.marginals().iter().enumerate() {
            for (k, &w) in marginal.probs().iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (a, &v) in acc.iter_mut().zip(self.subgame_row(q, k)) {
                    *a += w * v;
                }
            }
        }
        Ok(acc.into_iter().map(|v| self.to_effective(v)).collect())
    }

    pub fn expected_column_payoff(&self, x: &ProductStrategy, j: usize) -> Result<f64> {
        self.check_path(j)?;
        Ok(self.column_payoffs(x)?[j])
    }

    /// min over all joint strategies i of e_i^T A y, with a minimizer.
    /// Ties go to the lowest orientation index per sensor.
    pub fn expected_row_payoff_min(&self, y: &MixedStrategy) -> Result<(f64, JointStrategy)> {
        if y.len() != self.paths {
            return Err(Error::Dimension(format!("intruder strategy has {} entries, game has {} paths", y.len(), self.paths)));
        }
        let yp = y.probs();
        let mut total = -self.path_costs.iter().zip(yp).map(|(r, w)| r * w).sum::<f64>();
        let mut choice = Vec::with_capacity(self.sensors);
        for q in 0..self.sensors {
            let mut best = f64::INFINITY;
            let mut best_k = 0;
            for k in 0..self.orientations {
                let v: f64 = self.subgame_row(q, k).iter().zip(yp).map(|(a, w)| a * w).sum();
                if v < best {
                    best = v;
                    best_k = k;
                }
            }
            total += best;
            choice.push(best_k);
        }
        Ok((self.to_effective(total), JointStrategy::encode(choice, self.orientations)?))
    }

    /// Row payoffs e_i^T A y for all joint strategies (dense).
    pub fn row_payoffs(&self, y: &MixedStrategy) -> Result<Vec<f64>> {
        let dense = self.dense()?;
        let n = self.paths;
        Ok(dense.chunks_exact(n).map(|row| row.iter().zip(y.probs()).map(|(a, w)| a * w).sum()).collect())
    }

    /// Column payoffs x^T A e_j for a dense joint distribution.
    pub fn column_payoffs_joint(&self, x: &MixedStrategy) -> Result<Vec<f64>> {
        let dense = self.dense()?;
        if x.len() * self.paths != dense.len() {
            return Err(Error::Dimension(format!("joint strategy has {} entries", x.len())));
        }
        let mut acc = vec![0.0; self.paths];
        for (row, &w) in dense.chunks_exact(self.paths).zip(x.probs()) {
            if w == 0.0 {
                continue;
            }
            for (a, v) in acc.iter_mut().zip(row) {
                *a += w * v;
            }
        }
        Ok(acc)
    }

    /// The full m x n matrix on the solver scale, row-major, built on
    /// first use.
    pub fn dense(&self) -> Result<&[f64]> {
        if let Some(d) = self.dense.get() {
            return Ok(d);
        }
        let m = self.num_joint()?;
        let entries = (m as u128) * (self.paths as u128);
        if entries > self.dense_limit as u128 {
            return Err(Error::TooLarge { entries, limit: self.dense_limit });
        }
        let n = self.paths;
        let mut out = vec![0.0; m * n];
        let mut ks = vec![0usize; self.sensors];
        for row in out.chunks_exact_mut(n) {
            for (j, v) in row.iter_mut().enumerate() {
                let s: f64 = ks.iter().enumerate().map(|(q, &k)| self.subgame(q, k, j)).sum();
                *v = self.to_effective(s - self.path_costs[j]);
            }
            // odometer increment, last sensor least significant
            for slot in ks.iter_mut().rev() {
                *slot += 1;
                if *slot < self.orientations {
                    break;
                }
                *slot = 0;
            }
        }
        Ok(self.dense.get_or_init(|| out))
    }

    /// Same coverage and costs with new per-sensor detection
    /// probabilities. The result carries no normalization.
    pub fn with_detection(&self, p_detect: &[f64]) -> Result<Self> {
        let model = self.model.as_ref().ok_or(Error::NoSensorModel)?;
        if p_detect.len() != self.sensors {
            return Err(Error::Dimension(format!("{} detection probabilities for {} sensors", p_detect.len(), self.sensors)));
        }
        let mut m = model.clone();
        m.p_detect = p_detect.to_vec();
        let inst = Self::from_model(m, self.path_costs.clone())?;
        Ok(inst.with_dense_limit(self.dense_limit))
    }

    /// Every sensor set to the same detection probability.
    pub fn with_homogeneous_detection(&self, p_detect: f64) -> Result<Self> {
        self.with_detection(&vec![p_detect; self.sensors])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(coverage: Vec<Vec<Vec<u32>>>, p: Vec<f64>, costs: Vec<Vec<f64>>) -> SensorModel {
        let q = p.len();
        SensorModel {
            coverage: CoverageTensor::from_nested(&coverage).unwrap(),
            p_detect: p,
            p_bounds: vec![(0.05, 0.95); q],
            orientation_costs: costs,
        }
    }

    #[test]
    fn p_miss_examples() {
        let inst = GameInstance::from_model(model(vec![vec![vec![2]]], vec![0.5], vec![vec![0.0]]), vec![0.0]).unwrap();
        let i = JointStrategy::encode(vec![0], 1).unwrap();
        assert!((inst.p_miss(&i, 0).unwrap() - 0.25).abs() < 1e-15);

        let inst = GameInstance::from_model(
            model(vec![vec![vec![1]], vec![vec![1]]], vec![0.5, 0.75], vec![vec![0.0], vec![0.0]]),
            vec![0.0],
        )
        .unwrap();
        let i = JointStrategy::encode(vec![0, 0], 1).unwrap();
        assert!((inst.p_miss(&i, 0).unwrap() - 0.125).abs() < 1e-15);

        let inst = GameInstance::from_model(
            model(vec![vec![vec![0]], vec![vec![0]]], vec![0.5, 0.75], vec![vec![0.0], vec![0.0]]),
            vec![0.0],
        )
        .unwrap();
        assert_eq!(inst.p_miss(&i, 0).unwrap(), 1.0);
    }

    #[test]
    fn payoff_entry_examples() {
        // ln p_miss = -1 via V = 1, p = 1 - e^-1; c = 0.3; r = 0.2
        let p = 1.0 - (-1.0f64).exp();
        let inst = GameInstance::from_model(model(vec![vec![vec![1]]], vec![p], vec![vec![0.3]]), vec![0.2]).unwrap();
        let i = JointStrategy::encode(vec![0], 1).unwrap();
        assert!((inst.payoff_entry(&i, 0).unwrap() - (-0.9)).abs() < 1e-12);

        let inst = GameInstance::from_model(model(vec![vec![vec![0]]], vec![0.5], vec![vec![0.0]]), vec![0.0]).unwrap();
        assert_eq!(inst.payoff_entry(&i, 0).unwrap(), 0.0);
    }

    #[test]
    fn normalize_affine_examples() {
        let inst = GameInstance::from_rows(&[vec![-2.0, 0.0, 2.0]]).unwrap().normalize().unwrap();
        assert_eq!(inst.dense().unwrap(), &[0.0, 0.5, 1.0]);
        assert_eq!(inst.normalization(), Some(Normalization { min: -2.0, max: 2.0 }));

        let inst = GameInstance::from_rows(&[vec![0.0, 0.25], vec![1.0, 0.5]]).unwrap().normalize().unwrap();
        assert_eq!(inst.dense().unwrap(), &[0.0, 0.25, 1.0, 0.5]);

        let constant = GameInstance::from_rows(&[vec![3.0, 3.0], vec![3.0, 3.0]]).unwrap();
        assert!(matches!(constant.normalize(), Err(Error::DegeneratePayoffRange { .. })));
    }

    #[test]
    fn row_min_point_mass_uses_column_minima() {
        let inst = GameInstance::from_subgames(
            2,
            2,
            2,
            vec![
                1.0, 5.0, // q0 k0
                2.0, 0.0, // q0 k1
                3.0, 1.0, // q1 k0
                -1.0, 4.0, // q1 k1
            ],
            vec![0.5, 0.0],
        )
        .unwrap();
        let (v, i) = inst.expected_row_payoff_min(&MixedStrategy::point(2, 0)).unwrap();
        assert_eq!(i.orientations(), &[0, 1]);
        assert!((v - (1.0 - 1.0 - 0.5)).abs() < 1e-15);
        let dense = inst.dense().unwrap();
        let col0_min = (0..4).map(|r| dense[r * 2]).fold(f64::INFINITY, f64::min);
        assert_eq!(v, col0_min);
    }

    #[test]
    fn too_large_dense_is_an_error() {
        let inst = GameInstance::from_subgames(20, 4, 2, vec![0.0; 160], vec![0.0; 2]).unwrap();
        assert!(!inst.is_materializable());
        assert!(matches!(inst.dense(), Err(Error::TooLarge { .. })));
        // factorized evaluation still works
        let x = ProductStrategy::uniform(20, 4);
        assert_eq!(inst.column_payoffs(&x).unwrap(), vec![0.0, 0.0]);
    }
}
