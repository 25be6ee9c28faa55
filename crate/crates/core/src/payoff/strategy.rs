use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-9;

/// A probability vector over a finite strategy set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidStrategy("empty strategy".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidStrategy(format!("negative or non-finite weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidStrategy(format!("weights sum to {total}")));
        }
        Ok(MixedStrategy(weights))
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidStrategy(format!("cannot normalize weights with total {total}")));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        MixedStrategy(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, index: usize) -> Self {
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        MixedStrategy(w)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Inverse-CDF sample of one index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, &w) in self.0.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        // rounding left u above the running total; take the last positive entry
        self.0.iter().rposition(|&w| w > 0.0).unwrap_or(self.0.len() - 1)
    }

    pub fn total_variation(&self, other: &MixedStrategy) -> f64 {
        0.5 * self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// A defender strategy that picks each sensor's orientation independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductStrategy {
    marginals: Vec<MixedStrategy>,
}

impl ProductStrategy {
    pub fn new(marginals: Vec<MixedStrategy>) -> Result<Self> {
        let d = marginals.first().map_or(0, |m| m.len());
        if marginals.is_empty() || marginals.iter().any(|m| m.len() != d) {
            return Err(Error::Dimension("product strategy marginals must be nonempty and equal length".into()));
        }
        Ok(ProductStrategy { marginals })
    }

    pub fn uniform(sensors: usize, orientations: usize) -> Self {
        ProductStrategy { marginals: vec![MixedStrategy::uniform(orientations); sensors] }
    }

    /// Point mass on one joint orientation.
    pub fn point(joint: &JointStrategy, orientations: usize) -> Self {
        ProductStrategy {
            marginals: joint.orientations().iter().map(|&k| MixedStrategy::point(orientations, k)).collect(),
        }
    }

    pub fn marginals(&self) -> &[MixedStrategy] {
        &self.marginals
    }

    pub fn num_sensors(&self) -> usize {
        self.marginals.len()
    }

    pub fn num_orientations(&self) -> usize {
        self.marginals[0].len()
    }

    /// Probability of a joint strategy: product of the marginals.
    pub fn joint_prob(&self, joint: &JointStrategy) -> f64 {
        joint.orientations().iter().zip(&self.marginals).map(|(&k, m)| m.probs()[k]).product()
    }

    /// Samples each sensor's orientation independently.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.marginals.iter().map(|m| m.sample(rng)).collect()
    }

    /// Materializes the joint distribution (index order of `JointStrategy`).
    pub fn to_joint(&self) -> Result<MixedStrategy> {
        let p = self.num_sensors();
        let d = self.num_orientations();
        let m = joint_count(p, d)?;
        let mut w = vec![1.0; m];
        for (i, wi) in w.iter_mut().enumerate() {
            let joint = JointStrategy::decode(i, p, d)?;
            *wi = self.joint_prob(&joint);
        }
        Ok(MixedStrategy(w))
    }
}

/// d^p, or an error when it does not fit in memory indices.
pub fn joint_count(sensors: usize, orientations: usize) -> Result<usize> {
    u32::try_from(sensors)
        .ok()
        .and_then(|p| orientations.checked_pow(p))
        .ok_or_else(|| Error::param("sensors", format!("{orientations}^{sensors} joint strategies overflow")))
}

/// A pure defender strategy: one orientation per sensor, with its
/// base-d flat index (sensor 0 is the most significant digit).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointStrategy {
    orientations: Vec<usize>,
    flat: usize,
}

impl JointStrategy {
    pub fn encode(orientations: Vec<usize>, d: usize) -> Result<Self> {
        let mut flat: usize = 0;
        for (q, &k) in orientations.iter().enumerate() {
            if k >= d {
                return Err(Error::OutOfRange { what: "orientation", index: k, size: d });
            }
            flat = flat
                .checked_mul(d)
                .and_then(|f| f.checked_add(k))
                .ok_or_else(|| Error::param("orientations", format!("flat index overflow at sensor {q}")))?;
        }
        Ok(JointStrategy { orientations, flat })
    }

    pub fn decode(flat: usize, p: usize, d: usize) -> Result<Self> {
        let m = joint_count(p, d)?;
        if flat >= m {
            return Err(Error::OutOfRange { what: "joint strategy", index: flat, size: m });
        }
        let mut orientations = vec![0; p];
        let mut rest = flat;
        for slot in orientations.iter_mut().rev() {
            *slot = rest % d;
            rest /= d;
        }
        Ok(JointStrategy { orientations, flat })
    }

    pub fn orientations(&self) -> &[usize] {
        &self.orientations
    }

    pub fn flat(&self) -> usize {
        self.flat
    }
}

/// Either a distribution over joint strategies or a product of
/// per-sensor marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum DefenderStrategy {
    Joint(MixedStrategy),
    Product(ProductStrategy),
}

impl DefenderStrategy {
    /// Samples a pure joint strategy.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, p: usize, d: usize) -> Result<JointStrategy> {
        match self {
            DefenderStrategy::Joint(x) => JointStrategy::decode(x.sample(rng), p, d),
            DefenderStrategy::Product(x) => JointStrategy::encode(x.sample(rng), d),
        }
    }

    pub fn to_joint(&self) -> Result<MixedStrategy> {
        match self {
            DefenderStrategy::Joint(x) => Ok(x.clone()),
            DefenderStrategy::Product(x) => x.to_joint(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn encode_examples() {
        assert_eq!(JointStrategy::encode(vec![0, 0], 4).unwrap().flat(), 0);
        assert_eq!(JointStrategy::encode(vec![1, 2], 4).unwrap().flat(), 6);
        assert!(JointStrategy::encode(vec![4, 0], 4).is_err());
        assert!(JointStrategy::decode(16, 2, 4).is_err());
    }

    #[test]
    fn exhaustive_round_trip() {
        for (p, d) in [(1, 7), (2, 4), (5, 4), (10, 2), (3, 10)] {
            let m = joint_count(p, d).unwrap();
            assert!(m <= 1024);
            for i in 0..m {
                let js = JointStrategy::decode(i, p, d).unwrap();
                let back = JointStrategy::encode(js.orientations().to_vec(), d).unwrap();
                assert_eq!(back.flat(), i);
                assert_eq!(back, js);
            }
        }
    }

    #[test]
    fn mixed_strategy_validation() {
        assert!(MixedStrategy::new(vec![0.5, 0.5]).is_ok());
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![-0.5, 1.5]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
        assert!(MixedStrategy::from_weights(&[0.0, 0.0]).is_err());
        assert_eq!(MixedStrategy::from_weights(&[1.0, 3.0]).unwrap().probs(), &[0.25, 0.75]);
    }

    #[test]
    fn product_to_joint_sums_to_one() {
        let x = ProductStrategy::new(vec![
            MixedStrategy::new(vec![0.2, 0.8, 0.0]).unwrap(),
            MixedStrategy::new(vec![0.1, 0.3, 0.6]).unwrap(),
        ])
        .unwrap();
        let j = x.to_joint().unwrap();
        assert!((j.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // index 4 = [1, 1]
        assert!((j.probs()[4] - 0.8 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn sampling_point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = MixedStrategy::point(5, 3);
        assert!((0..100).all(|_| x.sample(&mut rng) == 3));
    }

    proptest! {
        #[test]
        fn decode_encode_bijective(p in 1usize..6, d in 2usize..6, seed in any::<u64>()) {
            let m = joint_count(p, d).unwrap();
            let i = (seed as usize) % m;
            let js = JointStrategy::decode(i, p, d).unwrap();
            prop_assert_eq!(JointStrategy::encode(js.orientations().to_vec(), d).unwrap().flat(), i);
        }
    }
}
