//! Grid worlds, sensor footprints and intruder routes.

mod config;
mod coverage;
mod grid;
mod paths;
mod sensors;

pub use config::{EnvConfig, SensorParams};
pub use coverage::{compute_coverage, line_of_sight, CoverageShape};
pub use grid::{Cell, Direction, GridEnvironment, NINE_ROOM_MAP};
pub use paths::{enumerate_paths, enumerate_simple_paths, k_shortest_paths, Path, PathOptions};
pub use sensors::{build_coverage_tensor, CoverageTensor, DetectionModel, Sensor};
