use std::collections::BTreeSet;

use crate::environment::grid::{Cell, Direction, GridEnvironment};
use crate::error::{Error, Result};

/// Footprint parameters shared by every sensor of an environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageShape {
    /// Maximum forward distance in cells; `None` runs until the grid edge.
    pub range: Option<usize>,
    /// Lateral width of the footprint in cells; must be odd.
    pub cone_width: usize,
}

impl Default for CoverageShape {
    fn default() -> Self {
        CoverageShape { range: None, cone_width: 1 }
    }
}

/// Rounds `num / den` to the nearest integer, halves away from zero.
fn div_round(num: isize, den: isize) -> isize {
    debug_assert!(den > 0);
    let q = (2 * num.abs() + den) / (2 * den);
    if num < 0 {
        -q
    } else {
        q
    }
}

/// True when every cell strictly between `from` and `to` on the digital
/// line joining their centres is free.
pub fn line_of_sight(env: &GridEnvironment, from: Cell, to: Cell) -> bool {
    let dr = to.row as isize - from.row as isize;
    let dc = to.col as isize - from.col as isize;
    let steps = dr.abs().max(dc.abs());
    (1..steps).all(|k| {
        let r = from.row as isize + div_round(k * dr, steps);
        let c = from.col as isize + div_round(k * dc, steps);
        env.in_bounds(r, c) && !env.is_blocked(Cell::new(r as usize, c as usize))
    })
}

/// Set of free cells seen by a sensor at `cell` facing `direction`.
///
/// Candidates are the cells at forward distance `1..=range` and lateral
/// offset at most `cone_width / 2`; a candidate is covered when it is free
/// and its line of sight to the sensor is unobstructed. The sensor's own
/// cell is always included.
pub fn compute_coverage(
    env: &GridEnvironment,
    cell: Cell,
    direction: Direction,
    shape: CoverageShape,
) -> Result<BTreeSet<Cell>> {
    if !env.is_free(cell) {
        return Err(Error::param("cell", format!("sensor cell {cell} is not a free cell")));
    }
    if shape.cone_width.is_multiple_of(2) {
        return Err(Error::param("cone_width", format!("must be odd, got {}", shape.cone_width)));
    }
    if shape.range == Some(0) {
        return Err(Error::param("range", "must be at least 1"));
    }
    let range = shape.range.unwrap_or(env.width().max(env.height()));
    let half = (shape.cone_width / 2) as isize;
    let (fr, fc) = direction.step();
    // lateral axis is the forward axis rotated a quarter turn
    let (lr, lc) = (fc, fr);

    let mut covered = BTreeSet::new();
    covered.insert(cell);
    for dist in 1..=range as isize {
        for off in -half..=half {
            let r = cell.row as isize + dist * fr + off * lr;
            let c = cell.col as isize + dist * fc + off * lc;
            if !env.in_bounds(r, c) {
                continue;
            }
            let target = Cell::new(r as usize, c as usize);
            if env.is_blocked(target) {
                continue;
            }
            if line_of_sight(env, cell, target) {
                covered.insert(target);
            }
        }
    }
    Ok(covered)
}
