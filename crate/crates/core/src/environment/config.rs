use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::environment::coverage::CoverageShape;
use crate::environment::grid::{Direction, GridEnvironment};
use crate::environment::paths::PathOptions;
use crate::environment::sensors::{DetectionModel, Sensor};
use crate::error::{Error, Result};

/// Per-sensor override of the default detection model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorParams {
    pub p_true: f64,
    pub p_min: f64,
    pub p_max: f64,
    #[serde(default)]
    pub orientation_costs: Option<Vec<f64>>,
}

/// Environment configuration, read from TOML.
///
/// ```toml
/// range = 6            # omit for "until the grid edge"
/// cone_width = 1
/// orientation_costs = [0.0, 0.0, 0.0, 0.0]
/// path_cost_scale = 0.0
/// num_paths = 50
/// path_seed = 0
///
/// [detection]
/// p_true = 0.8
/// p_min = 0.1
/// p_max = 0.9
///
/// [[sensor]]           # optional, one entry per sensor in symbol order
/// p_true = 0.7
/// p_min = 0.2
/// p_max = 0.9
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub range: Option<usize>,
    pub cone_width: usize,
    pub orientations: Vec<String>,
    pub orientation_costs: Vec<f64>,
    pub path_cost_scale: f64,
    pub num_paths: usize,
    pub path_seed: u64,
    pub num_shortest: Option<usize>,
    pub detection: DetectionModel,
    #[serde(rename = "sensor")]
    pub sensors: Vec<SensorParams>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            range: None,
            cone_width: 1,
            orientations: vec!["E".into(), "N".into(), "W".into(), "S".into()],
            orientation_costs: vec![0.0; 4],
            path_cost_scale: 0.0,
            num_paths: 50,
            path_seed: 0,
            num_shortest: None,
            detection: DetectionModel::default(),
            sensors: Vec::new(),
        }
    }
}

impl EnvConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: EnvConfig = toml::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cone_width.is_multiple_of(2) {
            return Err(Error::param("cone_width", format!("must be odd, got {}", self.cone_width)));
        }
        if self.range == Some(0) {
            return Err(Error::param("range", "must be at least 1"));
        }
        let dirs = self.directions()?;
        if dirs.len() < 2 {
            return Err(Error::param("orientations", "need at least two orientations"));
        }
        if self.orientation_costs.len() != dirs.len() {
            return Err(Error::param(
                "orientation_costs",
                format!("expected {} entries, got {}", dirs.len(), self.orientation_costs.len()),
            ));
        }
        if !(self.path_cost_scale.is_finite() && self.path_cost_scale >= 0.0) {
            return Err(Error::param("path_cost_scale", "must be finite and nonnegative"));
        }
        if self.num_paths == 0 {
            return Err(Error::param("num_paths", "must be at least 1"));
        }
        self.detection.validate()?;
        for s in &self.sensors {
            DetectionModel::new(s.p_true, s.p_min, s.p_max)?;
        }
        Ok(())
    }

    pub fn directions(&self) -> Result<Vec<Direction>> {
        self.orientations
            .iter()
            .map(|s| Direction::parse(s).ok_or_else(|| Error::param("orientations", format!("unknown direction {s:?}"))))
            .collect()
    }

    pub fn shape(&self) -> CoverageShape {
        CoverageShape { range: self.range, cone_width: self.cone_width }
    }

    pub fn path_options(&self) -> PathOptions {
        PathOptions { num_shortest: self.num_shortest, cost_scale: self.path_cost_scale, ..PathOptions::default() }
    }

    /// Detection model and orientation costs of sensor `q`.
    pub fn sensor_params(&self, q: usize) -> (DetectionModel, Vec<f64>) {
        match self.sensors.get(q) {
            Some(s) => (
                DetectionModel { p_true: s.p_true, p_min: s.p_min, p_max: s.p_max },
                s.orientation_costs.clone().unwrap_or_else(|| self.orientation_costs.clone()),
            ),
            None => (self.detection, self.orientation_costs.clone()),
        }
    }

    /// Builds every sensor of the environment with its footprints.
    pub fn build_sensors(&self, env: &GridEnvironment) -> Result<Vec<Sensor>> {
        let dirs = self.directions()?;
        env.sensors()
            .iter()
            .enumerate()
            .map(|(q, &(_, cell))| {
                let (detection, costs) = self.sensor_params(q);
                Sensor::build(env, q, cell, &dirs, self.shape(), costs, detection)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = r#"
range = 6
cone_width = 3
orientation_costs = [0.0, 0.1, 0.2, 0.3]
path_cost_scale = 0.01
num_paths = 20

[detection]
p_true = 0.8
p_min = 0.1
p_max = 0.9

[[sensor]]
p_true = 0.7
p_min = 0.2
p_max = 0.9
"#;
        let cfg = EnvConfig::from_toml(text).unwrap();
        assert_eq!(cfg.range, Some(6));
        assert_eq!(cfg.cone_width, 3);
        assert_eq!(cfg.sensor_params(0).0.p_true, 0.7);
        assert_eq!(cfg.sensor_params(1).0.p_true, 0.8);
        assert_eq!(cfg.sensor_params(1).1, vec![0.0, 0.1, 0.2, 0.3]);
    }

    #[test]
    fn rejects_invalid_fields() {
        assert!(EnvConfig::from_toml("cone_width = 2").is_err());
        assert!(EnvConfig::from_toml("bogus = 1").is_err());
        assert!(EnvConfig::from_toml("orientation_costs = [1.0]").is_err());
        assert!(EnvConfig::from_toml("[detection]\np_true = 0.95\np_min = 0.1\np_max = 0.9").is_err());
    }
}
