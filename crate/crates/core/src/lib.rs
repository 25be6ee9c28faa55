//! Intrusion-detection games between a sensor network and an intruder on a
//! grid graph: environment construction, equilibrium solvers, and online
//! learning of unknown detection probabilities.

pub mod environment;
pub mod error;
pub mod experiment;
pub mod online;
pub mod payoff;
pub mod solvers;

pub use error::{Error, Result};
pub use payoff::{DefenderStrategy, GameInstance, JointStrategy, MixedStrategy, ProductStrategy};
