//! Payoff matrices in factorized form, strategies, and normalization.

mod instance;
mod serialize;
mod strategy;

pub use instance::{GameInstance, Normalization, SensorModel, DEFAULT_DENSE_LIMIT};
pub use serialize::{load_instance, save_instance, InstanceFile, INSTANCE_FORMAT_VERSION};
pub use strategy::{joint_count, DefenderStrategy, JointStrategy, MixedStrategy, ProductStrategy};

use crate::error::{Error, Result};

/// Turns the general-sum pair (A, B) with A = ln p_miss + c_i and
/// B = -ln p_miss + r_j into its zero-sum equivalent (A - r_j, r_j - A).
///
/// B' is defined as the exact negation of A', after checking that
/// B - c_i agrees with it.
pub fn zero_sum_transform(a: f64, b: f64, c_i: f64, r_j: f64) -> Result<(f64, f64)> {
    let a_prime = a - r_j;
    let b_check = b - c_i;
    let scale = a.abs().max(b.abs()).max(c_i.abs()).max(r_j.abs()).max(1.0);
    if (b_check + a_prime).abs() > 1e-9 * scale {
        return Err(Error::InconsistentPayoffs(format!(
            "B - c = {b_check} does not negate A - r = {a_prime}"
        )));
    }
    Ok((a_prime, -a_prime))
}
