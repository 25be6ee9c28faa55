//! Command-line front end: build games, solve them, time the solvers and
//! run online learning experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use sensorsched::experiment::{
    emit_benchmark, emit_online, run_benchmark, run_benchmark_on, run_online_experiment, ExperimentConfig, InstanceSource,
    Mode, OutputFormat, SyntheticSpec, BUILTIN_MAP,
};
use sensorsched::online::{LearnerKind, OnlineProblem, PolicySpec};
use sensorsched::payoff::save_instance;
use sensorsched::solvers::{solve, SolverKind};
use sensorsched::Error;

#[derive(Parser, Debug)]
#[command(name = "sensorsched", version, about = "Sensor scheduling games on grid worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// experiment config (TOML); flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// map file, or `nine-room` for the built-in map
    #[arg(long, global = true)]
    map: Option<String>,

    /// saved instance (JSON) to use instead of a map
    #[arg(long, global = true, conflicts_with = "map")]
    instance: Option<PathBuf>,

    /// use a random synthetic game with this seed
    #[arg(long, global = true, conflicts_with_all = ["map", "instance"])]
    synthetic: Option<u64>,

    /// number of sensor slots taken from the map
    #[arg(long, global = true)]
    sensors: Option<usize>,

    /// target accuracy of the iterative solvers
    #[arg(long, global = true, allow_negative_numbers = true)]
    eps: Option<f64>,

    /// solver iterations, or rounds for the online verbs
    #[arg(long, global = true)]
    iters: Option<u64>,

    /// independent runs of the online verbs
    #[arg(long, global = true)]
    seeds: Option<usize>,

    /// master seed of the online runs
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// intruder policies: ne, random, fixed:<j> (comma separated)
    #[arg(long, global = true, value_delimiter = ',')]
    policy: Vec<PolicySpec>,

    /// output directory
    #[arg(long, global = true, env = "SENSORSCHED_OUT")]
    out: Option<PathBuf>,

    /// worker threads for the online runs (default: every processor)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// csv, svg or both
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Build a game and save it as JSON
    Generate,
    /// Solve a game with the exact, WM or DWM solver
    Solve {
        /// exact, wm or dwm
        #[arg(long)]
        solver: Option<SolverKind>,
    },
    /// Time the solvers over a range of sensor counts
    Bench,
    /// Online learning with one shared detection probability
    OnlineHom,
    /// Online learning with per-sensor probabilities and confidence bonuses
    OnlineHet,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Generate => Mode::Generate,
            Command::Solve { .. } => Mode::Solve,
            Command::Bench => Mode::Bench,
            Command::OnlineHom => Mode::OnlineHom,
            Command::OnlineHet => Mode::OnlineHet,
        }
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let mode = cli.command.mode();
    cfg.mode = Some(mode);
    if let Some(map) = &cli.map {
        cfg.map = Some(map.clone());
        cfg.synthetic = None;
        cfg.instance = None;
    }
    if let Some(path) = &cli.instance {
        cfg.instance = Some(path.clone());
        cfg.map = None;
        cfg.synthetic = None;
    }
    if let Some(seed) = cli.synthetic {
        let mut spec = cfg.synthetic.take().unwrap_or_else(|| SyntheticSpec::regret_study(seed));
        spec.seed = seed;
        cfg.synthetic = Some(spec);
        cfg.map = None;
        cfg.instance = None;
    }
    if cfg.map.is_none() && cfg.synthetic.is_none() && cfg.instance.is_none() {
        cfg.map = Some(BUILTIN_MAP.to_string());
    }
    if cli.sensors.is_some() {
        cfg.sensors = cli.sensors;
    }
    if let Some(eps) = cli.eps {
        cfg.solver.eps = eps;
        cfg.bench.eps = eps;
    }
    if let Command::Solve { solver: Some(kind) } = cli.command {
        cfg.solver.kind = kind;
    }
    if let Some(iters) = cli.iters {
        match mode {
            Mode::OnlineHom | Mode::OnlineHet => cfg.online.rounds = iters,
            _ => {
                cfg.solver.iterations = Some(iters);
                cfg.bench.iterations = Some(iters);
            }
        }
    }
    if let Some(runs) = cli.seeds {
        cfg.online.runs = runs;
    }
    if let Some(seed) = cli.seed {
        cfg.online.master_seed = seed;
    }
    if !cli.policy.is_empty() {
        cfg.online.policies = cli.policy.clone();
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    cfg.online.kind = if mode == Mode::OnlineHet { LearnerKind::Heterogeneous } else { LearnerKind::Homogeneous };
    cfg.online.threads = cfg.threads;
    cfg.validate()?;
    Ok(cfg)
}

fn source_label(cfg: &ExperimentConfig) -> String {
    match cfg.source() {
        Ok(InstanceSource::Map { path: None, sensors }) => format!("{BUILTIN_MAP} sensors={}", sensors.map_or("all".into(), |s| s.to_string())),
        Ok(InstanceSource::Map { path: Some(p), sensors }) => {
            format!("{} sensors={}", p.display(), sensors.map_or("all".into(), |s| s.to_string()))
        }
        Ok(InstanceSource::Synthetic(s)) => format!(
            "synthetic m={} n={} seed={} row_cost_max={} path_cost_max={}",
            s.m, s.n, s.seed, s.row_cost_max, s.path_cost_max
        ),
        Ok(InstanceSource::File(p)) => p.display().to_string(),
        Err(_) => String::new(),
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("results"))
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

fn run(cfg: &ExperimentConfig) -> Result<(), Error> {
    let out = out_dir(cfg);
    let label = source_label(cfg);
    match cfg.mode.unwrap_or(Mode::Solve) {
        Mode::Generate => {
            let inst = cfg.build_instance()?;
            create_dir(&out)?;
            let path = out.join("instance.json");
            save_instance(&inst, &path)?;
            let (p, d, n) = inst.dims();
            println!("wrote {} (sensors={p} orientations={d} paths={n})", path.display());
        }
        Mode::Solve => {
            let raw = cfg.build_instance()?;
            let inst = raw.normalize()?;
            let s = &cfg.solver;
            let res = solve(&inst, s.kind, s.eps, s.iterations, s.beta)?;
            let norm = inst.normalization().expect("normalized instance");
            create_dir(&out)?;
            let path = out.join("solution.json");
            let text = serde_json::to_string_pretty(&res).map_err(|e| Error::Serde(e.to_string()))?;
            std::fs::write(&path, text).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            println!(
                "solver={:?} value={:.6} (raw {:.6}) gap={:.3e} iterations={} time={:.3}s",
                s.kind,
                res.value_estimate,
                norm.invert(res.value_estimate),
                res.gap,
                res.iterations,
                res.wall_time
            );
            println!("wrote {}", path.display());
        }
        Mode::Bench => {
            let rows = match cfg.source()? {
                InstanceSource::Map { .. } => run_benchmark(&cfg.environment()?, &cfg.env, &cfg.bench)?,
                _ => {
                    let inst = cfg.build_instance()?;
                    run_benchmark_on(&[(inst.num_sensors(), inst)], &cfg.bench)?
                }
            };
            for r in &rows {
                info!("sensors={} |S|={} dwm={:?}s wm={:?}s exact={:?}s", r.sensors, r.strategy_space, r.dwm_s, r.wm_s, r.exact_s);
            }
            let meta = vec![
                ("instance".to_string(), label),
                ("eps".to_string(), cfg.bench.eps.to_string()),
                ("repeats".to_string(), cfg.bench.repeats.to_string()),
            ];
            for path in emit_benchmark(&out, &rows, cfg.format, &meta)? {
                println!("wrote {}", path.display());
            }
        }
        Mode::OnlineHom | Mode::OnlineHet => {
            let truth = cfg.build_instance()?;
            let inner = match cfg.online.kind {
                LearnerKind::Homogeneous => &cfg.online.homogeneous.inner,
                LearnerKind::Heterogeneous => &cfg.online.heterogeneous.inner,
            };
            let problem = OnlineProblem::new(label.clone(), &truth, inner)?;
            let curves = run_online_experiment(&problem, &cfg.online)?;
            for c in &curves {
                let last = c.mean.len().saturating_sub(1);
                println!(
                    "policy={} final mean regret={:.4} std={:.4} bound={:.4}",
                    c.policy,
                    c.mean.get(last).copied().unwrap_or(0.0),
                    c.std.get(last).copied().unwrap_or(0.0),
                    c.bound.get(last).copied().unwrap_or(0.0)
                );
            }
            let meta = vec![
                ("instance".to_string(), label),
                ("learner".to_string(), cfg.online.kind.as_str().to_string()),
                ("value".to_string(), problem.value.to_string()),
                ("rounds".to_string(), cfg.online.rounds.to_string()),
                ("runs".to_string(), cfg.online.runs.to_string()),
                ("master_seed".to_string(), cfg.online.master_seed.to_string()),
            ];
            for path in emit_online(&out, &curves, cfg.format, &meta)? {
                if path.extension().is_some_and(|e| e == "svg") || path.file_name().is_some_and(|f| f == "regret.csv") {
                    println!("wrote {}", path.display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
