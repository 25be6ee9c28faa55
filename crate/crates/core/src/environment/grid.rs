use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A grid cell, addressed by row (top = 0) and column (left = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Sensor orientation. The discriminant order is the orientation index k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    East,
    North,
    West,
    South,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::East, Direction::North, Direction::West, Direction::South];

    /// Unit step as (d_row, d_col).
    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::East => (0, 1),
            Direction::North => (-1, 0),
            Direction::West => (0, -1),
            Direction::South => (1, 0),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e" | "east" => Some(Direction::East),
            "n" | "north" => Some(Direction::North),
            "w" | "west" => Some(Direction::West),
            "s" | "south" => Some(Direction::South),
            _ => None,
        }
    }
}

/// A rectangular 4-connected grid world with obstacles, a source, a
/// terminal and an ordered list of sensor host cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridEnvironment {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    source: Cell,
    terminal: Cell,
    /// (symbol, cell), sorted by symbol.
    sensors: Vec<(char, Cell)>,
}

impl GridEnvironment {
    pub fn new(
        width: usize,
        height: usize,
        obstacles: &BTreeSet<Cell>,
        source: Cell,
        terminal: Cell,
        mut sensors: Vec<(char, Cell)>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidEnvironment("empty grid".into()));
        }
        let mut blocked = vec![false; width * height];
        for c in obstacles {
            if c.row >= height || c.col >= width {
                return Err(Error::InvalidEnvironment(format!("obstacle {c} out of bounds")));
            }
            blocked[c.row * width + c.col] = true;
        }
        let env_check = |what: &str, c: Cell| -> Result<()> {
            if c.row >= height || c.col >= width {
                return Err(Error::InvalidEnvironment(format!("{what} {c} out of bounds")));
            }
            if blocked[c.row * width + c.col] {
                return Err(Error::InvalidEnvironment(format!("{what} {c} is on an obstacle")));
            }
            Ok(())
        };
        env_check("source", source)?;
        env_check("terminal", terminal)?;
        if source == terminal {
            return Err(Error::InvalidEnvironment("source and terminal coincide".into()));
        }
        sensors.sort_by_key(|&(sym, _)| sym);
        for w in sensors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidEnvironment(format!("duplicate sensor symbol '{}'", w[0].0)));
            }
        }
        for &(sym, c) in &sensors {
            env_check(&format!("sensor '{sym}'"), c)?;
        }
        Ok(GridEnvironment { width, height, blocked, source, terminal, sensors })
    }

    /// Parses an ASCII map: `#` obstacle, `.` free, `S` source, `T` terminal,
    /// any other ASCII letter or digit a sensor host cell.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .collect::<Vec<_>>();
        let end = lines.iter().rposition(|l| !l.is_empty()).map_or(0, |p| p + 1);
        let lines = &lines[..end];
        if lines.is_empty() {
            return Err(Error::MapParse { line: 1, msg: "empty map".into() });
        }
        let width = lines[0].chars().count();
        let mut obstacles = BTreeSet::new();
        let mut source = None;
        let mut terminal = None;
        let mut sensors = Vec::new();
        for (row, line) in lines.iter().enumerate() {
            if line.chars().count() != width {
                return Err(Error::MapParse {
                    line: row + 1,
                    msg: format!("non-rectangular map: expected {width} columns, found {}", line.chars().count()),
                });
            }
            for (col, ch) in line.chars().enumerate() {
                let cell = Cell::new(row, col);
                match ch {
                    '#' => {
                        obstacles.insert(cell);
                    }
                    '.' => {}
                    'S' => {
                        if source.replace(cell).is_some() {
                            return Err(Error::MapParse { line: row + 1, msg: "multiple sources".into() });
                        }
                    }
                    'T' => {
                        if terminal.replace(cell).is_some() {
                            return Err(Error::MapParse { line: row + 1, msg: "multiple terminals".into() });
                        }
                    }
                    c if c.is_ascii_alphanumeric() => sensors.push((c, cell)),
                    other => {
                        return Err(Error::MapParse { line: row + 1, msg: format!("unexpected character {other:?}") });
                    }
                }
            }
        }
        let source = source.ok_or(Error::MissingSource)?;
        let terminal = terminal.ok_or(Error::MissingTerminal)?;
        GridEnvironment::new(width, lines.len(), &obstacles, source, terminal, sensors)
    }

    /// Serializes back to the ASCII map format.
    pub fn to_map(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                let c = Cell::new(row, col);
                let ch = if c == self.source {
                    'S'
                } else if c == self.terminal {
                    'T'
                } else if let Some(&(sym, _)) = self.sensors.iter().find(|(_, sc)| *sc == c) {
                    sym
                } else if self.is_blocked(c) {
                    '#'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn source(&self) -> Cell {
        self.source
    }

    pub fn terminal(&self) -> Cell {
        self.terminal
    }

    pub fn sensors(&self) -> &[(char, Cell)] {
        &self.sensors
    }

    pub fn sensor_cells(&self) -> Vec<Cell> {
        self.sensors.iter().map(|&(_, c)| c).collect()
    }

    pub fn obstacles(&self) -> BTreeSet<Cell> {
        (0..self.width * self.height).filter(|&i| self.blocked[i]).map(|i| self.cell(i)).collect()
    }

    pub fn in_bounds(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn is_blocked(&self, c: Cell) -> bool {
        self.blocked[self.index(c)]
    }

    pub fn is_free(&self, c: Cell) -> bool {
        c.row < self.height && c.col < self.width && !self.is_blocked(c)
    }

    /// Node index of a cell (row-major).
    pub fn index(&self, c: Cell) -> usize {
        c.row * self.width + c.col
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell::new(index / self.width, index % self.width)
    }

    pub fn num_free(&self) -> usize {
        self.blocked.iter().filter(|b| !**b).count()
    }

    /// Number of undirected edges between 4-adjacent free cells.
    pub fn num_edges(&self) -> usize {
        let mut edges = 0;
        for row in 0..self.height {
            for col in 0..self.width {
                let c = Cell::new(row, col);
                if self.is_blocked(c) {
                    continue;
                }
                if col + 1 < self.width && !self.is_blocked(Cell::new(row, col + 1)) {
                    edges += 1;
                }
                if row + 1 < self.height && !self.is_blocked(Cell::new(row + 1, col)) {
                    edges += 1;
                }
            }
        }
        edges
    }

    /// Free 4-neighbours of a node, in a fixed order (N, W, E, S).
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.cell(node);
        let (r, k) = (c.row as isize, c.col as isize);
        [(r - 1, k), (r, k - 1), (r, k + 1), (r + 1, k)]
            .into_iter()
            .filter(move |&(rr, cc)| self.in_bounds(rr, cc) && !self.blocked[rr as usize * self.width + cc as usize])
            .map(move |(rr, cc)| rr as usize * self.width + cc as usize)
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).any(|n| n == b)
    }

    /// Keeps only the first `count` sensors (in symbol order).
    pub fn with_sensor_count(&self, count: usize) -> Result<Self> {
        if count > self.sensors.len() {
            return Err(Error::param(
                "sensors",
                format!("requested {count} sensors but the map has {}", self.sensors.len()),
            ));
        }
        let mut env = self.clone();
        env.sensors.truncate(count);
        Ok(env)
    }
}

/// The bundled 19x19 nine-room map with ten sensor slots.
pub const NINE_ROOM_MAP: &str = include_str!("../../fixtures/nine_room.map");
