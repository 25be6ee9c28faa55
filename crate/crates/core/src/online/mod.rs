//! Repeated play against an intruder while learning the sensors'
//! detection probabilities from bandit feedback.

mod bounds;
mod estimator;
mod policy;
mod sim;
mod trace;
mod ucb;

pub use bounds::{regret_bound_homogeneous, ucb_delta, ucb_regret_bound, BoundCase};
pub use estimator::{clip_estimate, draw_feedback, estimate_matrix_homogeneous, EstimatorState, Feedback};
pub use policy::{intruder_step, sample_simplex, IntruderPolicy, PolicySpec};
pub use sim::{
    decode_round, inner_solve, run_heterogeneous, run_homogeneous, HeterogeneousConfig, HomogeneousConfig, InnerSolver,
    OnlineProblem,
};
pub use trace::{regret_summary, LearnerKind, OnlineTrace, RegretSummary, RoundRecord, TRACE_FORMAT};
pub use ucb::{bonus_term, sensor_scales, ucb_components, ucb_matrix, UcbComponents};
