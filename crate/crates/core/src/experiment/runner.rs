use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::online::{
    run_heterogeneous, run_homogeneous, HeterogeneousConfig, HomogeneousConfig, IntruderPolicy, LearnerKind,
    OnlineProblem, OnlineTrace, PolicySpec,
};

/// Seeded repetitions of one learner against several intruder policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnlineExperiment {
    pub kind: LearnerKind,
    pub rounds: u64,
    pub runs: usize,
    pub master_seed: u64,
    pub policies: Vec<PolicySpec>,
    pub homogeneous: HomogeneousConfig,
    pub heterogeneous: HeterogeneousConfig,
    /// worker threads; `None` uses every processor
    pub threads: Option<usize>,
}

impl Default for OnlineExperiment {
    fn default() -> Self {
        OnlineExperiment {
            kind: LearnerKind::Homogeneous,
            rounds: 1000,
            runs: 20,
            master_seed: 0,
            policies: vec![PolicySpec::Ne, PolicySpec::Random],
            homogeneous: HomogeneousConfig::default(),
            heterogeneous: HeterogeneousConfig::default(),
            threads: None,
        }
    }
}

/// Seed of run `index`, from its own stream of the master generator.
pub fn run_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Traces of every run against one policy, with seed-averaged curves.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCurves {
    pub policy: String,
    pub traces: Vec<OnlineTrace>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// theoretical bound at every round
    pub bound: Vec<f64>,
}

impl PolicyCurves {
    pub fn from_traces(policy: String, traces: Vec<OnlineTrace>, bound: Vec<f64>) -> Self {
        let rounds = traces.iter().map(|t| t.rounds.len()).min().unwrap_or(0);
        let runs = traces.len() as f64;
        let mut mean = vec![0.0; rounds];
        let mut std = vec![0.0; rounds];
        for t in 0..rounds {
            let m = traces.iter().map(|tr| tr.rounds[t].cumulative).sum::<f64>() / runs;
            let var = traces.iter().map(|tr| (tr.rounds[t].cumulative - m).powi(2)).sum::<f64>() / runs;
            mean[t] = m;
            std[t] = var.sqrt();
        }
        PolicyCurves { policy, traces, mean, std, bound }
    }
}

fn bound_curve(problem: &OnlineProblem, kind: LearnerKind, policy: &IntruderPolicy, rounds: u64, alpha: f64) -> Result<Vec<f64>> {
    (1..=rounds)
        .map(|t| match kind {
            LearnerKind::Homogeneous => problem.homogeneous_bound(t, alpha, policy),
            LearnerKind::Heterogeneous => Ok(problem.heterogeneous_bound(t)),
        })
        .collect()
}

/// Runs every (policy, run) pair on a worker pool. Results are collected
/// in run order, so output does not depend on the thread count.
pub fn run_online_experiment(problem: &OnlineProblem, cfg: &OnlineExperiment) -> Result<Vec<PolicyCurves>> {
    if cfg.rounds == 0 {
        return Err(Error::param("rounds", "must be at least 1"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cfg.threads {
        builder = builder.num_threads(threads);
    }
    let pool = builder.build().map_err(|e| Error::param("threads", e.to_string()))?;
    let mut out = Vec::with_capacity(cfg.policies.len());
    for spec in &cfg.policies {
        let policy = problem.policy(*spec);
        let traces = pool.install(|| {
            (0..cfg.runs)
                .into_par_iter()
                .map(|run| {
                    let seed = run_seed(cfg.master_seed, run);
                    match cfg.kind {
                        LearnerKind::Homogeneous => run_homogeneous(problem, &policy, cfg.rounds, seed, &cfg.homogeneous),
                        LearnerKind::Heterogeneous => {
                            run_heterogeneous(problem, &policy, cfg.rounds, seed, &cfg.heterogeneous)
                        }
                    }
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let bound = bound_curve(problem, cfg.kind, &policy, cfg.rounds, cfg.homogeneous.alpha)?;
        out.push(PolicyCurves::from_traces(spec.to_string(), traces, bound));
    }
    Ok(out)
}
