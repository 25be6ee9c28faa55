use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::payoff::instance::{GameInstance, Normalization, SensorModel};

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

/// On-disk layout of a game instance (JSON). Sub-game matrices are
/// stored as `subgames[q][k][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub sensors: usize,
    pub orientations: usize,
    pub paths: usize,
    pub subgames: Vec<Vec<Vec<f64>>>,
    pub path_costs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SensorModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
}

impl From<&GameInstance> for InstanceFile {
    fn from(inst: &GameInstance) -> Self {
        let (p, d, n) = inst.dims();
        InstanceFile {
            version: INSTANCE_FORMAT_VERSION,
            sensors: p,
            orientations: d,
            paths: n,
            subgames: (0..p).map(|q| (0..d).map(|k| inst.subgame_row(q, k).to_vec()).collect()).collect(),
            path_costs: inst.path_costs().to_vec(),
            model: inst.model().cloned(),
            normalization: inst.normalization(),
        }
    }
}

impl TryFrom<InstanceFile> for GameInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.version != INSTANCE_FORMAT_VERSION {
            return Err(Error::Serde(format!("unsupported instance format version {}", file.version)));
        }
        let (p, d, n) = (file.sensors, file.orientations, file.paths);
        let shape_ok = file.subgames.len() == p
            && file.subgames.iter().all(|per_q| per_q.len() == d && per_q.iter().all(|row| row.len() == n));
        if !shape_ok {
            return Err(Error::Dimension(format!("sub-game matrices do not match dims ({p}, {d}, {n})")));
        }
        let inst = match file.model {
            Some(model) => {
                let inst = GameInstance::from_model(model, file.path_costs)?;
                let flat: Vec<f64> = file.subgames.into_iter().flatten().flatten().collect();
                let consistent = inst.dims() == (p, d, n)
                    && inst.subgames_flat().iter().zip(&flat).all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(1.0));
                if !consistent {
                    return Err(Error::InconsistentPayoffs("stored sub-games disagree with the sensor model".into()));
                }
                inst
            }
            None => GameInstance::from_subgames(p, d, n, file.subgames.into_iter().flatten().flatten().collect(), file.path_costs)?,
        };
        match file.normalization {
            Some(stored) => {
                let norm = inst.normalize()?;
                let fresh = norm.normalization().expect("normalize sets bounds");
                if (fresh.min - stored.min).abs() > 1e-9 * fresh.min.abs().max(1.0)
                    || (fresh.max - stored.max).abs() > 1e-9 * fresh.max.abs().max(1.0)
                {
                    return Err(Error::InconsistentPayoffs(format!(
                        "stored normalization [{}, {}] differs from recomputed [{}, {}]",
                        stored.min, stored.max, fresh.min, fresh.max
                    )));
                }
                Ok(norm)
            }
            None => Ok(inst),
        }
    }
}

impl GameInstance {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&InstanceFile::from(self)).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        file.try_into()
    }
}

pub fn save_instance(inst: &GameInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, inst.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<GameInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    GameInstance::from_json(&text)
}
