use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::online::bounds::{regret_bound_homogeneous, ucb_bound_formula, ucb_delta, BoundCase};
use crate::online::estimator::{draw_feedback, estimate_matrix_homogeneous, EstimatorState};
use crate::online::policy::{intruder_step, IntruderPolicy, PolicySpec};
use crate::online::trace::{LearnerKind, OnlineTrace, RoundRecord};
use crate::online::ucb::{bonus_term, sensor_scales, ucb_components};
use crate::payoff::{DefenderStrategy, GameInstance, JointStrategy, MixedStrategy};
use crate::solvers::{
    dwm_beta, dwm_solve_with, expected_payoff, iterations_for_epsilon, solve_exact, DwmOptions, SolveResult,
};

/// How the defender solves its estimated game each round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InnerSolver {
    /// exploitability target of the iterative solver, normalized scale
    pub eps: f64,
    /// largest joint strategy count solved exactly
    pub exact_limit: usize,
    /// iteration cap of the iterative solver
    pub max_iterations: u64,
    /// rounds between gap checks of the iterative solver
    pub check_every: u64,
}

impl Default for InnerSolver {
    fn default() -> Self {
        InnerSolver { eps: 1e-3, exact_limit: 4096, max_iterations: 2_000_000, check_every: 500 }
    }
}

impl InnerSolver {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::param("eps", format!("must be positive, got {}", self.eps)));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be at least 1"));
        }
        Ok(())
    }
}

/// Solves `inst` exactly when small enough, else runs the distributed
/// solver on its normalization until the target gap or the cap.
pub fn inner_solve(inst: &GameInstance, cfg: &InnerSolver) -> Result<SolveResult> {
    if inst.is_materializable() && inst.num_joint()? <= cfg.exact_limit {
        return solve_exact(inst);
    }
    iterative_solve(inst, cfg.eps, cfg.max_iterations, cfg.check_every)
}

fn iterative_solve(inst: &GameInstance, eps: f64, cap: u64, check_every: u64) -> Result<SolveResult> {
    let (p, d, n) = inst.dims();
    let norm = match inst.normalize() {
        Ok(norm) => norm,
        Err(Error::DegeneratePayoffRange { min, .. }) => {
            // every strategy pair is an equilibrium of a constant game
            return Ok(SolveResult {
                defender: DefenderStrategy::Product(crate::payoff::ProductStrategy::uniform(p, d)),
                intruder: MixedStrategy::uniform(n),
                value_estimate: min,
                gap: 0.0,
                iterations: 0,
                beta: None,
                wall_time: 0.0,
            });
        }
        Err(e) => return Err(e),
    };
    let t = iterations_for_epsilon(eps, p, d)?.min(cap).max(1);
    let beta = dwm_beta(t as f64, p, d)?;
    let mut res = dwm_solve_with(&norm, DwmOptions { beta, max_iterations: t, target_gap: Some(eps), check_every })?;
    let range = norm.normalization().expect("normalized").range();
    res.value_estimate = norm.normalization().expect("normalized").invert(res.value_estimate);
    res.gap *= range;
    Ok(res)
}

/// A true game together with its value and an intruder equilibrium.
#[derive(Debug, Clone)]
pub struct OnlineProblem {
    pub label: String,
    pub truth: GameInstance,
    /// V*_A on the raw payoff scale
    pub value: f64,
    pub equilibrium: SolveResult,
}

impl OnlineProblem {
    /// Computes V*_A exactly when the game can be materialized, else with
    /// the distributed solver at gap 1e-6 (normalized), capped by
    /// `cfg.max_iterations`.
    pub fn new(label: impl Into<String>, truth: &GameInstance, cfg: &InnerSolver) -> Result<Self> {
        cfg.validate()?;
        let truth = truth.denormalized();
        truth.model().ok_or(Error::NoSensorModel)?;
        let equilibrium = if truth.is_materializable() {
            solve_exact(&truth)?
        } else {
            iterative_solve(&truth, 1e-6, cfg.max_iterations, cfg.check_every)?
        };
        Ok(OnlineProblem { label: label.into(), value: equilibrium.value_estimate, truth, equilibrium })
    }

    pub fn y_dagger(&self) -> &MixedStrategy {
        &self.equilibrium.intruder
    }

    pub fn policy(&self, spec: PolicySpec) -> IntruderPolicy {
        spec.resolve(self.y_dagger())
    }

    /// Largest total coverage V_ij over all (i, j).
    pub fn v_max(&self) -> f64 {
        let model = self.truth.model().expect("checked on construction");
        let (p, d, n) = self.truth.dims();
        (0..n)
            .map(|j| (0..p).map(|q| (0..d).map(|k| model.coverage.get(q, k, j)).max().unwrap_or(0)).sum::<u32>())
            .max()
            .unwrap_or(0) as f64
    }

    /// Largest p_max over sensors.
    pub fn p_max(&self) -> f64 {
        let model = self.truth.model().expect("checked on construction");
        model.p_bounds.iter().map(|b| b.1).fold(0.0, f64::max)
    }

    /// Bounds shared by every sensor: the intersection of the intervals.
    pub fn common_bounds(&self) -> (f64, f64) {
        let model = self.truth.model().expect("checked on construction");
        model.p_bounds.iter().fold((0.0, 1.0), |(lo, hi), b| (lo.max(b.0), hi.min(b.1)))
    }

    pub fn p_true(&self) -> &[f64] {
        &self.truth.model().expect("checked on construction").p_detect
    }

    /// x^T A y on the true raw payoffs.
    pub fn payoff(&self, x: &DefenderStrategy, y: &MixedStrategy) -> Result<f64> {
        expected_payoff(&self.truth, x, y)
    }

    /// Homogeneous regret bound for the opponent type of `policy`.
    pub fn homogeneous_bound(&self, t: u64, alpha: f64, policy: &IntruderPolicy) -> Result<f64> {
        let case = match policy {
            IntruderPolicy::TrueNe(_) => BoundCase::EquilibriumOpponent,
            _ => BoundCase::Other,
        };
        regret_bound_homogeneous(t, alpha, self.v_max(), self.p_max(), case)
    }

    /// Heterogeneous regret bound evaluated even when T is below p d n.
    pub fn heterogeneous_bound(&self, t: u64) -> f64 {
        let model = self.truth.model().expect("checked on construction");
        let (p, d, n) = self.truth.dims();
        let v_bar = (0..p).map(|q| model.coverage.max_for_sensor(q)).max().unwrap_or(0) as f64;
        ucb_bound_formula(t, p, d, n, v_bar, self.p_max())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomogeneousConfig {
    pub inner: InnerSolver,
    /// confidence level of the reported bound
    pub alpha: f64,
    /// replaces the learner's estimate every round (test hook)
    pub estimate_override: Option<f64>,
    pub keep_strategies: bool,
}

impl Default for HomogeneousConfig {
    fn default() -> Self {
        HomogeneousConfig { inner: InnerSolver::default(), alpha: 0.05, estimate_override: None, keep_strategies: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeterogeneousConfig {
    pub inner: InnerSolver,
    /// confidence parameter; `None` uses 1 / (2 T^2 p d n)
    pub delta: Option<f64>,
    /// multiplies every bonus (1 = the confidence bound, 0 disables it)
    pub bonus_scale: f64,
    /// replaces the per-sensor estimates every round (test hook)
    pub estimate_override: Option<Vec<f64>>,
    pub keep_strategies: bool,
}

impl Default for HeterogeneousConfig {
    fn default() -> Self {
        HeterogeneousConfig {
            inner: InnerSolver::default(),
            delta: None,
            bonus_scale: 1.0,
            estimate_override: None,
            keep_strategies: false,
        }
    }
}

/// Independent generators for the defender side (sampling and sensor
/// noise) and the intruder side.
fn run_rngs(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let defender = ChaCha8Rng::seed_from_u64(seed);
    let mut intruder = ChaCha8Rng::seed_from_u64(seed);
    intruder.set_stream(1);
    (defender, intruder)
}

fn new_trace(kind: LearnerKind, problem: &OnlineProblem, seed: u64, policy: &IntruderPolicy, rounds: u64) -> OnlineTrace {
    OnlineTrace {
        kind,
        instance: problem.label.clone(),
        seed,
        policy: policy.label(),
        value: problem.value,
        p_true: problem.p_true().to_vec(),
        bound: f64::NAN,
        rounds: Vec::with_capacity(rounds as usize),
        warnings: Vec::new(),
        strategies: None,
    }
}

/// Repeated play with a single unknown detection probability shared by
/// every sensor: estimate, solve the estimated game, play, observe.
pub fn run_homogeneous(
    problem: &OnlineProblem,
    policy: &IntruderPolicy,
    rounds: u64,
    seed: u64,
    cfg: &HomogeneousConfig,
) -> Result<OnlineTrace> {
    if rounds == 0 {
        return Err(Error::param("T", "must be at least 1"));
    }
    cfg.inner.validate()?;
    let truth = &problem.truth;
    let (p, d, n) = truth.dims();
    policy.validate(n)?;
    let p_true = problem.p_true();
    if p_true.iter().any(|&v| v != p_true[0]) {
        return Err(Error::param("p_detect", "homogeneous learning needs one shared detection probability"));
    }
    let (lo, hi) = problem.common_bounds();
    if lo >= hi {
        return Err(Error::param("p_bounds", "sensor bounds do not overlap"));
    }
    let (mut rng, mut intruder_rng) = run_rngs(seed);
    let mut est = EstimatorState::new(p);
    let mut trace = new_trace(LearnerKind::Homogeneous, problem, seed, policy, rounds);
    let mut strategies = cfg.keep_strategies.then(Vec::new);
    let mut cumulative = 0.0;
    for t in 1..=rounds {
        let p_hat = cfg.estimate_override.unwrap_or_else(|| est.pooled_estimate(lo, hi));
        let estimate = estimate_matrix_homogeneous(truth, p_hat)?;
        let sol = inner_solve(&estimate, &cfg.inner)?;
        let (y, j) = intruder_step(policy, n, &mut intruder_rng);
        let i = sol.defender.sample(&mut rng, p, d)?;
        let feedback = draw_feedback(truth, &i, j, &mut rng)?;
        let payoff = problem.payoff(&sol.defender, &y)?;
        let regret = payoff - problem.value;
        cumulative += regret;
        est.record(i.flat(), j, &feedback);
        trace.rounds.push(RoundRecord {
            t,
            i: i.flat(),
            j,
            hits: (0..p).map(|q| feedback.hits(q)).collect(),
            draws: (0..p).map(|q| feedback.draws(q)).collect(),
            p_hat: vec![p_hat],
            payoff,
            regret,
            cumulative,
            inner_gap: sol.gap,
            bonus: Vec::new(),
            counts: Vec::new(),
            min_bonus: None,
        });
        if let Some(s) = strategies.as_mut() {
            s.push((sol.defender, y));
        }
    }
    trace.bound = problem.homogeneous_bound(rounds, cfg.alpha, policy)?;
    trace.strategies = strategies;
    Ok(trace)
}

/// Repeated play with per-sensor unknown probabilities: the defender
/// solves the optimistic matrix Ā - bonus (the confidence bound on -A
/// seen by a maximizer) each round.
pub fn run_heterogeneous(
    problem: &OnlineProblem,
    policy: &IntruderPolicy,
    rounds: u64,
    seed: u64,
    cfg: &HeterogeneousConfig,
) -> Result<OnlineTrace> {
    if rounds == 0 {
        return Err(Error::param("T", "must be at least 1"));
    }
    cfg.inner.validate()?;
    let truth = &problem.truth;
    let (p, d, n) = truth.dims();
    policy.validate(n)?;
    if !truth.is_materializable() {
        return Err(Error::TooLarge {
            entries: truth.num_joint()? as u128 * n as u128,
            limit: truth.dense_limit(),
        });
    }
    if !(cfg.bonus_scale >= 0.0 && cfg.bonus_scale.is_finite()) {
        return Err(Error::param("bonus_scale", "must be finite and nonnegative"));
    }
    let model = truth.model().ok_or(Error::NoSensorModel)?;
    if let Some(o) = &cfg.estimate_override {
        if o.len() != p {
            return Err(Error::Dimension(format!("{} estimate overrides for {p} sensors", o.len())));
        }
    }
    let m = truth.num_joint()?;
    let delta = cfg.delta.unwrap_or_else(|| ucb_delta(rounds, p, d, n));
    let scales = sensor_scales(truth)?;
    let (mut rng, mut intruder_rng) = run_rngs(seed);
    let mut est = EstimatorState::new(p);
    let mut trace = new_trace(LearnerKind::Heterogeneous, problem, seed, policy, rounds);
    if (rounds as usize) < p * d * n {
        trace.warnings.push(format!("horizon T = {rounds} is below p d n = {}; the regret bound does not apply", p * d * n));
    }
    let mut strategies = cfg.keep_strategies.then(Vec::new);
    let mut cumulative = 0.0;
    for t in 1..=rounds {
        let p_hat = match &cfg.estimate_override {
            Some(o) => o.clone(),
            None => est.sensor_estimates(&model.p_bounds),
        };
        let parts = ucb_components(&est, truth, delta, &p_hat, cfg.bonus_scale)?;
        let upper = parts.upper();
        let min_bonus = upper.iter().zip(&parts.mean).map(|(u, a)| u - a).fold(f64::INFINITY, f64::min);
        let optimistic = GameInstance::from_matrix(m, n, parts.lower())?;
        let sol = inner_solve(&optimistic, &cfg.inner)?;
        let x = DefenderStrategy::Joint(sol.defender.to_joint()?);
        let (y, j) = intruder_step(policy, n, &mut intruder_rng);
        let i = x.sample(&mut rng, p, d)?;
        let counts: Vec<u64> = (0..p).map(|l| est.pair_count(i.flat(), j, l)).collect();
        let bonus = counts.iter().zip(&scales).map(|(&c, &s)| cfg.bonus_scale * bonus_term(s, delta, c)).collect();
        let feedback = draw_feedback(truth, &i, j, &mut rng)?;
        let payoff = problem.payoff(&x, &y)?;
        let regret = payoff - problem.value;
        cumulative += regret;
        est.record(i.flat(), j, &feedback);
        trace.rounds.push(RoundRecord {
            t,
            i: i.flat(),
            j,
            hits: (0..p).map(|q| feedback.hits(q)).collect(),
            draws: (0..p).map(|q| feedback.draws(q)).collect(),
            p_hat,
            payoff,
            regret,
            cumulative,
            inner_gap: sol.gap,
            bonus,
            counts,
            min_bonus: Some(min_bonus),
        });
        if let Some(s) = strategies.as_mut() {
            s.push((x, y));
        }
    }
    trace.bound = problem.heterogeneous_bound(rounds);
    trace.strategies = strategies;
    Ok(trace)
}

/// Rebuilds the joint strategy played in a round.
pub fn decode_round(problem: &OnlineProblem, record: &RoundRecord) -> Result<JointStrategy> {
    let (p, d, _) = problem.truth.dims();
    JointStrategy::decode(record.i, p, d)
}
