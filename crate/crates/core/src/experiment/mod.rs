//! Experiment drivers: scenario construction, synthetic games,
//! benchmarks, online regret studies and their outputs.

mod benchmark;
mod config;
mod output;
mod runner;
mod scenario;
mod synthetic;

pub use benchmark::{run_benchmark, run_benchmark_on, BenchmarkConfig, BenchmarkRow};
pub use config::{ExperimentConfig, InstanceSource, Mode, SolverSettings, BUILTIN_MAP};
pub use output::{
    benchmark_svg, emit_benchmark, emit_online, regret_svg, write_benchmark_csv, write_regret_csv, OutputFormat,
    BENCH_COLUMNS, BENCH_SCHEMA, REGRET_COLUMNS, REGRET_SCHEMA,
};
pub use runner::{run_online_experiment, run_seed, OnlineExperiment, PolicyCurves};
pub use scenario::{grid_scenario, nine_room_instance, GridScenario};
pub use synthetic::{generate_synthetic, SyntheticSpec};
