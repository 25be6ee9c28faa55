use std::time::Instant;

use crate::error::{Error, Result};
use crate::payoff::{DefenderStrategy, GameInstance, MixedStrategy};
use crate::solvers::gap::{argmax, expected_payoff, exploitability_gap};
use crate::solvers::SolveResult;

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", format!("must lie in (0, 1), got {beta}")));
    }
    Ok(())
}

/// Multiplicative weights over the full joint strategy set.
#[derive(Debug, Clone)]
pub struct WeightedMajority<'a> {
    dense: &'a [f64],
    m: usize,
    n: usize,
    beta: f64,
    /// beta^{A_ij}, stored column-major so a round touches one slice
    factors: Vec<f64>,
    weights: Vec<f64>,
    round: u64,
}

impl<'a> WeightedMajority<'a> {
    pub fn new(inst: &'a GameInstance, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        inst.require_unit_range()?;
        let dense = inst.dense()?;
        let m = inst.num_joint()?;
        let n = inst.num_paths();
        let ln_beta = beta.ln();
        let mut factors = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                factors[j * m + i] = (dense[i * n + j] * ln_beta).exp();
            }
        }
        Ok(WeightedMajority { dense, m, n, beta, factors, weights: vec![1.0 / m as f64; m], round: 0 })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Current distribution over joint strategies (weights are kept
    /// normalized).
    pub fn strategy(&self) -> &[f64] {
        &self.weights
    }

    pub fn column_payoffs(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n];
        for (row, &w) in self.dense.chunks_exact(self.n).zip(&self.weights) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += w * v;
            }
        }
        acc
    }

    pub fn best_response(&self) -> usize {
        argmax(&self.column_payoffs())
    }

    /// Applies the loss of path `j` to every joint strategy.
    pub fn update(&mut self, j: usize) {
        let column = &self.factors[j * self.m..(j + 1) * self.m];
        let mut total = 0.0;
        for (w, f) in self.weights.iter_mut().zip(column) {
            *w *= f;
            total += *w;
        }
        let inv = 1.0 / total;
        self.weights.iter_mut().for_each(|w| *w *= inv);
        self.round += 1;
    }
}

/// Runs `iterations` rounds of WM against a best-responding intruder and
/// returns the averaged strategies.
pub fn wm_solve(inst: &GameInstance, beta: f64, iterations: u64) -> Result<SolveResult> {
    let start = Instant::now();
    let mut wm = WeightedMajority::new(inst, beta)?;
    let (m, n) = (wm.m, wm.n);
    let mut x_sum = vec![0.0; m];
    let mut y_count = vec![0u64; n];
    for _ in 0..iterations {
        let cols = wm.column_payoffs();
        let j = argmax(&cols);
        for (s, w) in x_sum.iter_mut().zip(wm.strategy()) {
            *s += w;
        }
        y_count[j] += 1;
        wm.update(j);
    }
    let (x, y) = if iterations == 0 {
        (MixedStrategy::uniform(m), MixedStrategy::point(n, wm.best_response()))
    } else {
        let t = iterations as f64;
        (
            MixedStrategy::from_weights(&x_sum.iter().map(|s| s / t).collect::<Vec<_>>())?,
            MixedStrategy::from_weights(&y_count.iter().map(|&c| c as f64 / t).collect::<Vec<_>>())?,
        )
    };
    let wall_time = start.elapsed().as_secs_f64();
    let x = DefenderStrategy::Joint(x);
    Ok(SolveResult {
        value_estimate: expected_payoff(inst, &x, &y)?,
        gap: exploitability_gap(inst, &x, &y)?,
        defender: x,
        intruder: y,
        iterations,
        beta: Some(beta),
        wall_time,
    })
}
