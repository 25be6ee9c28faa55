use std::time::Instant;

use crate::error::{Error, Result};
use crate::payoff::{DefenderStrategy, GameInstance, MixedStrategy};
use crate::solvers::gap::{expected_payoff, exploitability_gap};
use crate::solvers::SolveResult;

const PIVOT_TOL: f64 = 1e-12;
const DEGENERATE_LIMIT: usize = 64;

/// Dense tableau for `max 1^T s  s.t.  M s <= 1, s >= 0` with slack basis.
struct Tableau {
    rows: usize,
    vars: usize,
    width: usize,
    cells: Vec<f64>,
    objective: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    /// `constraints` is rows x vars, row-major.
    fn new(rows: usize, vars: usize, constraints: &[f64]) -> Self {
        let width = vars + rows + 1;
        let mut cells = vec![0.0; rows * width];
        for r in 0..rows {
            let line = &mut cells[r * width..(r + 1) * width];
            line[..vars].copy_from_slice(&constraints[r * vars..(r + 1) * vars]);
            line[vars + r] = 1.0;
            line[width - 1] = 1.0;
        }
        let mut objective = vec![0.0; width];
        objective[..vars].iter_mut().for_each(|c| *c = -1.0);
        Tableau { rows, vars, width, cells, objective, basis: (vars..vars + rows).collect() }
    }

    fn rhs(&self, r: usize) -> f64 {
        self.cells[r * self.width + self.width - 1]
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let reduced = &self.objective[..self.width - 1];
        if bland {
            return reduced.iter().position(|&c| c < -PIVOT_TOL);
        }
        let mut best = None;
        let mut most = -PIVOT_TOL;
        for (c, &v) in reduced.iter().enumerate() {
            if v < most {
                most = v;
                best = Some(c);
            }
        }
        best
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let a = self.cells[r * self.width + col];
            if a > PIVOT_TOL {
                let ratio = self.rhs(r) / a;
                let better = match best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < bratio - PIVOT_TOL || (ratio <= bratio + PIVOT_TOL && self.basis[r] < self.basis[br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let inv = 1.0 / self.cells[row * w + col];
        for v in &mut self.cells[row * w..(row + 1) * w] {
            *v *= inv;
        }
        let pivot_row: Vec<f64> = self.cells[row * w..(row + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == row {
                continue;
            }
            let factor = self.cells[r * w + col];
            if factor != 0.0 {
                for (v, p) in self.cells[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        let factor = self.objective[col];
        if factor != 0.0 {
            for (v, p) in self.objective.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
        self.basis[row] = col;
    }

    /// Runs to optimality. Dantzig's rule, switching to Bland's rule
    /// after a run of degenerate pivots.
    fn optimize(&mut self, max_pivots: usize) -> Result<usize> {
        let mut degenerate_run = 0;
        for pivots in 0..max_pivots {
            let bland = degenerate_run >= DEGENERATE_LIMIT;
            let Some(col) = self.entering(bland) else {
                return Ok(pivots);
            };
            let row = self.leaving(col).ok_or_else(|| Error::Lp("unbounded program".into()))?;
            if self.rhs(row) <= PIVOT_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
        }
        Err(Error::Lp(format!("no optimum after {max_pivots} pivots")))
    }

    fn primal(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.vars {
                s[b] = self.rhs(r).max(0.0);
            }
        }
        s
    }

    /// Dual prices, read from the reduced costs of the slack columns.
    fn dual(&self) -> Vec<f64> {
        self.objective[self.vars..self.vars + self.rows].iter().map(|&u| u.max(0.0)).collect()
    }
}

/// Equilibrium of a dense zero-sum game where the row player minimizes.
/// Returns (x, y, value).
pub fn solve_matrix_game(rows: usize, cols: usize, entries: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if rows == 0 || cols == 0 || entries.len() != rows * cols {
        return Err(Error::Dimension(format!("{rows}x{cols} game with {} entries", entries.len())));
    }
    let min = entries.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    // constraints indexed by column j: sum_i (A_ij + shift) s_i <= 1
    let mut transposed = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            transposed[j * rows + i] = entries[i * cols + j] + shift;
        }
    }
    let mut tab = Tableau::new(cols, rows, &transposed);
    tab.optimize(50 * (rows + cols) + 1000)?;
    let s = tab.primal();
    let u = tab.dual();
    let total_s: f64 = s.iter().sum();
    let total_u: f64 = u.iter().sum();
    if !(total_s > 0.0 && total_u > 0.0) {
        return Err(Error::Lp("degenerate optimum".into()));
    }
    let x: Vec<f64> = s.iter().map(|v| v / total_s).collect();
    let y: Vec<f64> = u.iter().map(|v| v / total_u).collect();
    Ok((x, y, 1.0 / total_s - shift))
}

/// Exact equilibrium by the simplex method on the materialized matrix.
pub fn solve_exact(inst: &GameInstance) -> Result<SolveResult> {
    let start = Instant::now();
    let dense = inst.dense()?;
    let m = inst.num_joint()?;
    let n = inst.num_paths();
    let (x, y, _) = solve_matrix_game(m, n, dense)?;
    let x = DefenderStrategy::Joint(MixedStrategy::from_weights(&x)?);
    let y = MixedStrategy::from_weights(&y)?;
    let wall_time = start.elapsed().as_secs_f64();
    let gap = exploitability_gap(inst, &x, &y)?;
    Ok(SolveResult {
        value_estimate: expected_payoff(inst, &x, &y)?,
        defender: x,
        intruder: y,
        gap,
        iterations: 0,
        beta: None,
        wall_time,
    })
}
