use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::payoff::{GameInstance, JointStrategy};

/// Sample mean projected into [p_min, p_max]. Without samples (NaN) the
/// midpoint of the interval is returned.
pub fn clip_estimate(p_hat_raw: f64, p_min: f64, p_max: f64) -> f64 {
    if p_hat_raw.is_nan() {
        return 0.5 * (p_min + p_max);
    }
    p_hat_raw.clamp(p_min, p_max)
}

/// Detection bits of one round: for every sensor, one bit per covered
/// node of the intruder's path.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Feedback {
    pub bits: Vec<Vec<bool>>,
}

impl Feedback {
    pub fn hits(&self, q: usize) -> u64 {
        self.bits[q].iter().filter(|&&b| b).count() as u64
    }

    pub fn draws(&self, q: usize) -> u64 {
        self.bits[q].len() as u64
    }

    pub fn total_draws(&self) -> u64 {
        self.bits.iter().map(|b| b.len() as u64).sum()
    }
}

/// Simulates the sensors watching path `j` under joint orientation `i`,
/// using the true detection probabilities of `truth`.
pub fn draw_feedback<R: Rng + ?Sized>(truth: &GameInstance, i: &JointStrategy, j: usize, rng: &mut R) -> Result<Feedback> {
    let model = truth.model().ok_or(Error::NoSensorModel)?;
    if i.orientations().len() != truth.num_sensors() {
        return Err(Error::Dimension("joint strategy does not match the game".into()));
    }
    if j >= truth.num_paths() {
        return Err(Error::OutOfRange { what: "path", index: j, size: truth.num_paths() });
    }
    let bits = i
        .orientations()
        .iter()
        .enumerate()
        .map(|(q, &k)| {
            let v = model.coverage.get(q, k, j);
            let p = model.p_detect[q];
            (0..v).map(|_| rng.random_bool(p)).collect()
        })
        .collect();
    Ok(Feedback { bits })
}

/// Running detection statistics of the learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorState {
    hits: Vec<u64>,
    draws: Vec<u64>,
    /// n_{ij,l}: rounds in which (i, j) was played and sensor l saw the
    /// path; only visited pairs are stored.
    pair_counts: BTreeMap<(usize, usize), Vec<u64>>,
}

impl EstimatorState {
    pub fn new(sensors: usize) -> Self {
        EstimatorState { hits: vec![0; sensors], draws: vec![0; sensors], pair_counts: BTreeMap::new() }
    }

    pub fn num_sensors(&self) -> usize {
        self.hits.len()
    }

    pub fn record(&mut self, i_flat: usize, j: usize, feedback: &Feedback) {
        let p = self.num_sensors();
        for q in 0..p {
            self.hits[q] += feedback.hits(q);
            self.draws[q] += feedback.draws(q);
        }
        if feedback.total_draws() > 0 {
            let counts = self.pair_counts.entry((i_flat, j)).or_insert_with(|| vec![0; p]);
            for (q, c) in counts.iter_mut().enumerate() {
                if feedback.draws(q) > 0 {
                    *c += 1;
                }
            }
        }
    }

    pub fn sensor_hits(&self) -> &[u64] {
        &self.hits
    }

    pub fn sensor_draws(&self) -> &[u64] {
        &self.draws
    }

    pub fn total_hits(&self) -> u64 {
        self.hits.iter().sum()
    }

    pub fn total_draws(&self) -> u64 {
        self.draws.iter().sum()
    }

    /// Pooled clipped estimate, for sensors sharing one probability.
    pub fn pooled_estimate(&self, p_min: f64, p_max: f64) -> f64 {
        clip_estimate(self.total_hits() as f64 / self.total_draws() as f64, p_min, p_max)
    }

    /// Clipped per-sensor estimates.
    pub fn sensor_estimates(&self, bounds: &[(f64, f64)]) -> Vec<f64> {
        self.hits
            .iter()
            .zip(&self.draws)
            .zip(bounds)
            .map(|((&h, &n), &(lo, hi))| clip_estimate(h as f64 / n as f64, lo, hi))
            .collect()
    }

    pub fn pair_count(&self, i_flat: usize, j: usize, l: usize) -> u64 {
        self.pair_counts.get(&(i_flat, j)).map_or(0, |c| c[l])
    }

    pub fn visited_pairs(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<u64>)> {
        self.pair_counts.iter()
    }

    /// Sum of n_{ij,l} over all pairs and sensors.
    pub fn total_pair_counts(&self) -> u64 {
        self.pair_counts.values().flatten().sum()
    }
}

/// The learner's matrix when every sensor shares the estimate `p_hat`.
pub fn estimate_matrix_homogeneous(template: &GameInstance, p_hat: f64) -> Result<GameInstance> {
    if !(p_hat > 0.0 && p_hat < 1.0) {
        return Err(Error::param("p_hat", format!("must lie in (0, 1), got {p_hat}")));
    }
    template.with_homogeneous_detection(p_hat)
}
