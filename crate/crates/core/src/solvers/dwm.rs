use std::time::Instant;

use crate::error::{Error, Result};
use crate::payoff::{DefenderStrategy, GameInstance, MixedStrategy, ProductStrategy};
use crate::solvers::gap::{argmax, expected_payoff, exploitability_gap};
use crate::solvers::wm::check_beta;
use crate::solvers::SolveResult;

/// Rounds between full recomputations of the incrementally maintained
/// column payoffs.
const REFRESH_EVERY: u32 = 1024;

/// Unscaled loss of sensor q in orientation k against y:
/// sum_j A^q_kj y_j - (1/p) sum_j r_j y_j.
pub fn per_sensor_loss_raw(inst: &GameInstance, q: usize, k: usize, y: &MixedStrategy) -> Result<f64> {
    let (p, d, n) = inst.dims();
    if q >= p {
        return Err(Error::OutOfRange { what: "sensor", index: q, size: p });
    }
    if k >= d {
        return Err(Error::OutOfRange { what: "orientation", index: k, size: d });
    }
    if y.len() != n {
        return Err(Error::Dimension(format!("intruder strategy has {} entries, game has {n} paths", y.len())));
    }
    let row = inst.subgame_row(q, k);
    Ok(row
        .iter()
        .zip(inst.path_costs())
        .zip(y.probs())
        .map(|((a, r), w)| (a - r / p as f64) * w)
        .sum())
}

/// The per-sensor loss on the solver scale. Every sensor shares the
/// game's affine map, so summing over sensors of a joint strategy i gives
/// exactly e_i^T A y as the solvers see it.
pub fn per_sensor_loss(inst: &GameInstance, q: usize, k: usize, y: &MixedStrategy) -> Result<f64> {
    let raw = per_sensor_loss_raw(inst, q, k, y)?;
    Ok(match inst.normalization() {
        Some(norm) => (raw - norm.min / inst.num_sensors() as f64) / norm.range(),
        None => raw,
    })
}

/// Per-sensor multiplicative weights (one weight vector per sensor).
#[derive(Debug, Clone)]
pub struct DwmState<'a> {
    inst: &'a GameInstance,
    p: usize,
    d: usize,
    n: usize,
    beta: f64,
    /// beta^{loss(q, k | j)} at [(q * n + j) * d + k]
    factors: Vec<f64>,
    /// whether sensor q's loss against path j differs across orientations
    varies: Vec<bool>,
    /// per sensor, the paths whose payoff depends on its orientation
    seen: Vec<Vec<usize>>,
    /// A^q_{kj} - A^q_{0j} for k >= 1 and j in `seen[q]`, column by column
    diffs: Vec<Vec<f64>>,
    sigma: Vec<f64>,
    previous: Vec<f64>,
    raw_columns: Vec<f64>,
    sigma_sum: Vec<f64>,
    flushed_at: Vec<u64>,
    round: u64,
    since_refresh: u32,
}

impl<'a> DwmState<'a> {
    pub fn new(inst: &'a GameInstance, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        inst.require_unit_range()?;
        let (p, d, n) = inst.dims();
        let (offset, scale) = match inst.normalization() {
            Some(norm) => (norm.min, 1.0 / norm.range()),
            None => (0.0, 1.0),
        };
        let ln_beta = beta.ln();
        let mut factors = vec![0.0; p * n * d];
        let mut varies = vec![false; p * n];
        for q in 0..p {
            for j in 0..n {
                let shared = (inst.path_costs()[j] + offset) / p as f64;
                let first = inst.subgame(q, 0, j);
                for k in 0..d {
                    let a = inst.subgame(q, k, j);
                    factors[(q * n + j) * d + k] = ((a - shared) * scale * ln_beta).exp();
                    varies[q * n + j] |= a != first;
                }
            }
        }
        let mut seen = vec![Vec::new(); p];
        let mut diffs = vec![Vec::new(); p];
        for q in 0..p {
            for j in (0..n).filter(|&j| varies[q * n + j]) {
                seen[q].push(j);
                let base = inst.subgame(q, 0, j);
                diffs[q].extend((1..d).map(|k| inst.subgame(q, k, j) - base));
            }
        }
        let mut state = DwmState {
            inst,
            p,
            d,
            n,
            beta,
            factors,
            varies,
            seen,
            diffs,
            sigma: vec![1.0 / d as f64; p * d],
            previous: vec![0.0; d],
            raw_columns: vec![0.0; n],
            sigma_sum: vec![0.0; p * d],
            flushed_at: vec![0; p],
            round: 0,
            since_refresh: 0,
        };
        state.refresh_columns();
        Ok(state)
    }

    fn refresh_columns(&mut self) {
        let cols = &mut self.raw_columns;
        for (c, r) in cols.iter_mut().zip(self.inst.path_costs()) {
            *c = -r;
        }
        for q in 0..self.p {
            for k in 0..self.d {
                let w = self.sigma[q * self.d + k];
                for (c, a) in cols.iter_mut().zip(self.inst.subgame_row(q, k)) {
                    *c += w * a;
                }
            }
        }
        self.since_refresh = 0;
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Normalized weights of sensor q.
    pub fn sigma(&self, q: usize) -> &[f64] {
        &self.sigma[q * self.d..(q + 1) * self.d]
    }

    pub fn strategy(&self) -> ProductStrategy {
        let marginals = (0..self.p).map(|q| MixedStrategy::new(self.sigma(q).to_vec())).collect::<Result<Vec<_>>>();
        ProductStrategy::new(marginals.expect("weights stay normalized")).expect("marginals share one length")
    }

    /// x_t^T A e_j for every path, on the solver scale.
    pub fn column_payoffs(&self) -> Vec<f64> {
        self.raw_columns.iter().map(|&c| self.inst.to_effective(c)).collect()
    }

    /// Lowest-index path maximizing x_t^T A e_j.
    pub fn best_response(&self) -> usize {
        argmax(&self.raw_columns)
    }

    /// One multiplicative update of every sensor against path `j`.
    pub fn update(&mut self, j: usize) {
        let (d, n) = (self.d, self.n);
        let incremental = self.since_refresh + 1 < REFRESH_EVERY;
        for q in 0..self.p {
            if !self.varies[q * n + j] {
                continue;
            }
            let span = (self.round + 1 - self.flushed_at[q]) as f64;
            let factors = &self.factors[(q * n + j) * d..(q * n + j + 1) * d];
            let sigma = &mut self.sigma[q * d..(q + 1) * d];
            let sums = &mut self.sigma_sum[q * d..(q + 1) * d];
            self.previous.copy_from_slice(sigma);
            let mut total = 0.0;
            for k in 0..d {
                sums[k] += span * sigma[k];
                sigma[k] *= factors[k];
                total += sigma[k];
            }
            let inv = 1.0 / total;
            sigma.iter_mut().for_each(|s| *s *= inv);
            self.flushed_at[q] = self.round + 1;
            if incremental {
                // the changes sum to zero, so only paths seen by sensor q move
                for (prev, s) in self.previous.iter_mut().zip(sigma.iter()).skip(1) {
                    *prev = s - *prev;
                }
                let delta = &self.previous[1..];
                for (&col, diff) in self.seen[q].iter().zip(self.diffs[q].chunks_exact(d - 1)) {
                    self.raw_columns[col] += diff.iter().zip(delta).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
        self.round += 1;
        self.since_refresh += 1;
        if !incremental {
            self.refresh_columns();
        }
    }

    /// The time average of the product strategies played so far, stored
    /// as averaged marginals. Because payoffs are additive over sensors,
    /// it earns exactly the same payoff as the mixture against every path.
    pub fn average_strategy(&self) -> ProductStrategy {
        if self.round == 0 {
            return self.strategy();
        }
        let t = self.round as f64;
        let marginals = (0..self.p)
            .map(|q| {
                let span = (self.round - self.flushed_at[q]) as f64;
                let w: Vec<f64> = (0..self.d)
                    .map(|k| (self.sigma_sum[q * self.d + k] + span * self.sigma[q * self.d + k]) / t)
                    .collect();
                MixedStrategy::from_weights(&w).expect("averaged weights are positive")
            })
            .collect();
        ProductStrategy::new(marginals).expect("marginals share one length")
    }
}

/// Options for [`dwm_solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwmOptions {
    pub beta: f64,
    pub max_iterations: u64,
    /// Stop early once the averaged strategies reach this gap.
    pub target_gap: Option<f64>,
    /// Rounds between gap checks when a target is set.
    pub check_every: u64,
}

/// Algorithm 1 for a fixed number of rounds.
pub fn dwm_solve(inst: &GameInstance, beta: f64, iterations: u64) -> Result<SolveResult> {
    dwm_solve_with(inst, DwmOptions { beta, max_iterations: iterations, target_gap: None, check_every: 0 })
}

pub fn dwm_solve_with(inst: &GameInstance, opts: DwmOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let mut state = DwmState::new(inst, opts.beta)?;
    let n = inst.num_paths();
    let mut y_count = vec![0u64; n];
    let check_every = opts.check_every.max(1);
    let averages = |state: &DwmState, y_count: &[u64]| -> Result<(DefenderStrategy, MixedStrategy)> {
        let t = state.round();
        let y = if t == 0 {
            MixedStrategy::point(n, state.best_response())
        } else {
            MixedStrategy::from_weights(&y_count.iter().map(|&c| c as f64 / t as f64).collect::<Vec<_>>())?
        };
        Ok((DefenderStrategy::Product(state.average_strategy()), y))
    };
    while state.round() < opts.max_iterations {
        let j = state.best_response();
        y_count[j] += 1;
        state.update(j);
        if let Some(target) = opts.target_gap {
            if state.round() % check_every == 0 {
                let (x, y) = averages(&state, &y_count)?;
                if exploitability_gap(inst, &x, &y)? <= target {
                    break;
                }
            }
        }
    }
    let (x, y) = averages(&state, &y_count)?;
    let wall_time = start.elapsed().as_secs_f64();
    Ok(SolveResult {
        value_estimate: expected_payoff(inst, &x, &y)?,
        gap: exploitability_gap(inst, &x, &y)?,
        defender: x,
        intruder: y,
        iterations: state.round(),
        beta: Some(opts.beta),
        wall_time,
    })
}
