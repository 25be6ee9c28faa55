use crate::error::{Error, Result};
use crate::payoff::{DefenderStrategy, GameInstance, MixedStrategy};

/// x^T A e_j for every path, on the solver scale.
pub fn defender_column_payoffs(inst: &GameInstance, x: &DefenderStrategy) -> Result<Vec<f64>> {
    match x {
        DefenderStrategy::Joint(x) => inst.column_payoffs_joint(x),
        DefenderStrategy::Product(x) => inst.column_payoffs(x),
    }
}

/// x^T A y on the solver scale.
pub fn expected_payoff(inst: &GameInstance, x: &DefenderStrategy, y: &MixedStrategy) -> Result<f64> {
    let cols = defender_column_payoffs(inst, x)?;
    if cols.len() != y.len() {
        return Err(Error::Dimension(format!("intruder strategy has {} entries, game has {} paths", y.len(), cols.len())));
    }
    Ok(cols.iter().zip(y.probs()).map(|(a, w)| a * w).sum())
}

/// max_j x^T A e_j - min_i e_i^T A y. Uses the factorized evaluators, so
/// product strategies never touch the joint strategy set.
pub fn exploitability_gap(inst: &GameInstance, x: &DefenderStrategy, y: &MixedStrategy) -> Result<f64> {
    let cols = defender_column_payoffs(inst, x)?;
    let best_intruder = cols.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (best_defender, _) = inst.expected_row_payoff_min(y)?;
    Ok(best_intruder - best_defender)
}

/// Lowest index attaining the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}
