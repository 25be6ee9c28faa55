use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::{EnvConfig, GridEnvironment, NINE_ROOM_MAP};
use crate::error::{Error, Result};
use crate::experiment::benchmark::BenchmarkConfig;
use crate::experiment::runner::OnlineExperiment;
use crate::experiment::output::OutputFormat;
use crate::experiment::synthetic::{generate_synthetic, SyntheticSpec};
use crate::payoff::{load_instance, GameInstance};
use crate::solvers::SolverKind;

/// Name that selects the built-in nine-room map instead of a file.
pub const BUILTIN_MAP: &str = "nine-room";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Generate,
    Solve,
    Bench,
    OnlineHom,
    OnlineHet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub kind: SolverKind,
    pub eps: f64,
    pub iterations: Option<u64>,
    pub beta: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { kind: SolverKind::Dwm, eps: 0.001, iterations: None, beta: None }
    }
}

/// Where the game comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// a map file, or the built-in map
    Map { path: Option<PathBuf>, sensors: Option<usize> },
    Synthetic(SyntheticSpec),
    File(PathBuf),
}

/// Everything one CLI run needs, loadable from TOML.
///
/// ```toml
/// mode = "online-hom"
/// out = "results"
///
/// [synthetic]
/// m = 10
/// n = 20
///
/// [online]
/// rounds = 1000
/// runs = 20
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    /// map file, or `nine-room`
    pub map: Option<String>,
    /// number of sensor slots to use from the map
    pub sensors: Option<usize>,
    pub env: EnvConfig,
    pub synthetic: Option<SyntheticSpec>,
    /// saved instance (JSON)
    pub instance: Option<PathBuf>,
    pub solver: SolverSettings,
    pub bench: BenchmarkConfig,
    pub online: OnlineExperiment,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.rebase(dir);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, dir: &Path) {
        if let Some(map) = &self.map {
            if map != BUILTIN_MAP && Path::new(map).is_relative() {
                self.map = Some(dir.join(map).to_string_lossy().into_owned());
            }
        }
        if let Some(inst) = &self.instance {
            if inst.is_relative() {
                self.instance = Some(dir.join(inst));
            }
        }
    }

    /// The single configured instance source.
    pub fn source(&self) -> Result<InstanceSource> {
        let given = [self.map.is_some(), self.synthetic.is_some(), self.instance.is_some()];
        match given.iter().filter(|&&g| g).count() {
            0 => Err(Error::param("source", "set one of map, synthetic or instance")),
            1 => Ok(if let Some(map) = &self.map {
                let path = (map != BUILTIN_MAP).then(|| PathBuf::from(map));
                InstanceSource::Map { path, sensors: self.sensors }
            } else if let Some(spec) = &self.synthetic {
                InstanceSource::Synthetic(spec.clone())
            } else {
                InstanceSource::File(self.instance.clone().unwrap_or_default())
            }),
            _ => Err(Error::param("source", "map, synthetic and instance are mutually exclusive")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.solver.eps > 0.0 && self.solver.eps.is_finite()) {
            return Err(Error::param("eps", format!("must be positive, got {}", self.solver.eps)));
        }
        if let Some(beta) = self.solver.beta {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::param("beta", format!("must lie in (0, 1), got {beta}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::param("threads", "must be at least 1"));
        }
        if self.online.rounds == 0 {
            return Err(Error::param("rounds", "must be at least 1"));
        }
        if self.online.runs == 0 {
            return Err(Error::param("seeds", "must be at least 1"));
        }
        if self.sensors == Some(0) {
            return Err(Error::param("sensors", "must be at least 1"));
        }
        self.bench.validate()?;
        match self.source()? {
            InstanceSource::Synthetic(spec) => spec.validate(),
            InstanceSource::Map { .. } => self.env.validate(),
            InstanceSource::File(_) => Ok(()),
        }
    }

    /// The map of a map source.
    pub fn environment(&self) -> Result<GridEnvironment> {
        match self.source()? {
            InstanceSource::Map { path: None, .. } => GridEnvironment::parse(NINE_ROOM_MAP),
            InstanceSource::Map { path: Some(path), .. } => {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                GridEnvironment::parse(&text)
            }
            _ => Err(Error::param("map", "this mode needs a map source")),
        }
    }

    /// Builds the raw (unnormalized) game.
    pub fn build_instance(&self) -> Result<GameInstance> {
        match self.source()? {
            InstanceSource::Map { sensors, .. } => {
                let env = self.environment()?;
                Ok(super::scenario::grid_scenario(&env, &self.env, sensors)?.instance)
            }
            InstanceSource::Synthetic(spec) => generate_synthetic(&spec),
            InstanceSource::File(path) => load_instance(path),
        }
    }
}
