use crate::environment::{build_coverage_tensor, enumerate_paths, EnvConfig, GridEnvironment, Path};
use crate::error::Result;
use crate::payoff::{GameInstance, SensorModel};

/// A grid-world game together with the routes behind its columns.
#[derive(Debug, Clone)]
pub struct GridScenario {
    pub env: GridEnvironment,
    pub paths: Vec<Path>,
    pub instance: GameInstance,
}

/// Builds the game for the first `sensors` sensor slots of `env` (all
/// slots when `None`). Payoffs are left unnormalized.
pub fn grid_scenario(env: &GridEnvironment, cfg: &EnvConfig, sensors: Option<usize>) -> Result<GridScenario> {
    cfg.validate()?;
    let env = match sensors {
        Some(count) => env.with_sensor_count(count)?,
        None => env.clone(),
    };
    let paths = enumerate_paths(&env, cfg.num_paths, cfg.path_seed, &cfg.path_options())?;
    let built = cfg.build_sensors(&env)?;
    let coverage = build_coverage_tensor(&env, &built, &paths)?;
    let model = SensorModel {
        coverage,
        p_detect: built.iter().map(|s| s.detection.p_true).collect(),
        p_bounds: built.iter().map(|s| (s.detection.p_min, s.detection.p_max)).collect(),
        orientation_costs: built.iter().map(|s| s.orientation_costs.clone()).collect(),
    };
    let instance = GameInstance::from_model(model, paths.iter().map(|p| p.cost).collect())?;
    Ok(GridScenario { env, paths, instance })
}

/// The shipped nine-room world with its default configuration.
pub fn nine_room_instance(sensors: usize) -> Result<GameInstance> {
    let env = GridEnvironment::parse(crate::environment::NINE_ROOM_MAP)?;
    Ok(grid_scenario(&env, &EnvConfig::default(), Some(sensors))?.instance)
}
