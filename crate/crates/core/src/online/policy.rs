use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::payoff::MixedStrategy;

/// How the intruder picks y_t each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "strategy", rename_all = "snake_case")]
pub enum IntruderPolicy {
    /// An equilibrium strategy of the true game, every round.
    TrueNe(MixedStrategy),
    /// A fresh uniformly random point of the simplex each round.
    UniformSimplex,
    FixedMixed(MixedStrategy),
    FixedPure(usize),
}

impl IntruderPolicy {
    /// Short label used in file names and headers.
    pub fn label(&self) -> String {
        match self {
            IntruderPolicy::TrueNe(_) => "ne".into(),
            IntruderPolicy::UniformSimplex => "random".into(),
            IntruderPolicy::FixedMixed(_) => "mixed".into(),
            IntruderPolicy::FixedPure(j) => format!("fixed:{j}"),
        }
    }

    pub fn validate(&self, paths: usize) -> Result<()> {
        match self {
            IntruderPolicy::TrueNe(y) | IntruderPolicy::FixedMixed(y) if y.len() != paths => {
                Err(Error::Dimension(format!("intruder strategy has {} entries, game has {paths} paths", y.len())))
            }
            IntruderPolicy::FixedPure(j) if *j >= paths => Err(Error::OutOfRange { what: "path", index: *j, size: paths }),
            _ => Ok(()),
        }
    }
}

/// Policy names accepted on the command line: `ne`, `random`, `fixed:<j>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicySpec {
    Ne,
    Random,
    Fixed(usize),
}

impl std::str::FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ne" => Ok(PolicySpec::Ne),
            "random" => Ok(PolicySpec::Random),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|j| j.parse().ok())
                .map(PolicySpec::Fixed)
                .ok_or_else(|| Error::param("policy", format!("expected ne, random or fixed:<j>, got {s:?}"))),
        }
    }
}

impl std::fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicySpec::Ne => write!(f, "ne"),
            PolicySpec::Random => write!(f, "random"),
            PolicySpec::Fixed(j) => write!(f, "fixed:{j}"),
        }
    }
}

impl TryFrom<String> for PolicySpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PolicySpec> for String {
    fn from(p: PolicySpec) -> String {
        p.to_string()
    }
}

impl PolicySpec {
    /// Binds the spec to a game whose intruder equilibrium is `y_dagger`.
    pub fn resolve(self, y_dagger: &MixedStrategy) -> IntruderPolicy {
        match self {
            PolicySpec::Ne => IntruderPolicy::TrueNe(y_dagger.clone()),
            PolicySpec::Random => IntruderPolicy::UniformSimplex,
            PolicySpec::Fixed(j) => IntruderPolicy::FixedPure(j),
        }
    }
}

/// Uniform point of the n-simplex: normalized i.i.d. standard exponentials.
pub fn sample_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MixedStrategy {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    MixedStrategy::from_weights(&draws).unwrap_or_else(|_| MixedStrategy::uniform(n))
}

/// The intruder's mixed strategy for this round and a pure path drawn
/// from it.
pub fn intruder_step<R: Rng + ?Sized>(policy: &IntruderPolicy, paths: usize, rng: &mut R) -> (MixedStrategy, usize) {
    let y = match policy {
        IntruderPolicy::TrueNe(y) | IntruderPolicy::FixedMixed(y) => y.clone(),
        IntruderPolicy::UniformSimplex => sample_simplex(paths, rng),
        IntruderPolicy::FixedPure(j) => MixedStrategy::point(paths, *j),
    };
    let j = y.sample(rng);
    (y, j)
}
