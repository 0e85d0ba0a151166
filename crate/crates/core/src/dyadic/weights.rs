use std::ops::Deref;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::lattice::Lattice;

/// Nonnegative leaf values in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight(Vec<f64>);

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("weight value at leaf {k} is {}", values[k])));
        }
        Ok(Self(values))
    }

    pub fn constant(lattice: &Lattice, value: f64) -> Result<Self> {
        Self::new(vec![value; lattice.num_leaves()])
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self(self.0.iter().map(|v| v * lambda).collect())
    }

    pub fn sqrt(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.sqrt()).collect()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Weight {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Weight generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum WeightKind {
    Constant { value: f64 },
    /// `exp(μ + σZ)` independently per leaf.
    Lognormal { mu: f64, sigma: f64 },
    /// `x^a` averaged over each leaf interval.
    Power { a: f64 },
    /// `v = x^a`, `w = x^{−a}`; A₂ degenerates as `a ↑ 1`.
    A2ExtremalPair { a: f64 },
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub kind: WeightKind,
    #[serde(default)]
    pub seed: u64,
}

impl WeightSpec {
    pub fn new(kind: WeightKind) -> Self {
        Self { kind, seed: 0 }
    }

    /// A single weight. For the extremal pair this is the `v` component.
    pub fn generate(&self, lattice: &Lattice) -> Result<Weight> {
        self.generate_seeded(lattice, self.seed)
    }

    pub fn generate_seeded(&self, lattice: &Lattice, seed: u64) -> Result<Weight> {
        Ok(self.generate_pair_seeded(lattice, seed)?.0)
    }

    /// `(v, w)`: the extremal pair for that kind, otherwise two draws from the
    /// same generator (identical for deterministic kinds).
    pub fn generate_pair_seeded(&self, lattice: &Lattice, seed: u64) -> Result<(Weight, Weight)> {
        let leaves = lattice.num_leaves();
        match &self.kind {
            WeightKind::Constant { value } => {
                if !(*value >= 0.0 && value.is_finite()) {
                    return Err(Error::param("value", "constant weight must be nonnegative"));
                }
                let w = Weight::constant(lattice, *value)?;
                Ok((w.clone(), w))
            }
            WeightKind::Lognormal { mu, sigma } => {
                let dist = LogNormal::new(*mu, *sigma)
                    .map_err(|e| Error::param("sigma", e.to_string()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let v = Weight::new((0..leaves).map(|_| dist.sample(&mut rng)).collect())?;
                let w = Weight::new((0..leaves).map(|_| dist.sample(&mut rng)).collect())?;
                Ok((v, w))
            }
            WeightKind::Power { a } => {
                let w = power_weight(lattice, *a)?;
                Ok((w.clone(), w))
            }
            WeightKind::A2ExtremalPair { a } => a2_extremal_pair(lattice, *a),
            WeightKind::Explicit { values } => {
                if values.len() != leaves {
                    return Err(Error::param(
                        "values",
                        format!("expected {leaves} leaf values, got {}", values.len()),
                    ));
                }
                let w = Weight::new(values.clone())?;
                Ok((w.clone(), w))
            }
        }
    }
}

/// `x^a` averaged over each leaf, with leaves laid out on `[0, 1)` by mass.
pub fn power_weight(lattice: &Lattice, a: f64) -> Result<Weight> {
    if !(a > -1.0 && a.is_finite()) {
        return Err(Error::param("a", format!("need a > -1 for integrability, got {a}")));
    }
    if a == 0.0 {
        return Weight::constant(lattice, 1.0);
    }
    let p = a + 1.0;
    Weight::new(
        lattice
            .leaf_intervals()
            .into_iter()
            .map(|(lo, hi)| (hi.powf(p) - lo.powf(p)) / (p * (hi - lo)))
            .collect(),
    )
}

/// `(x^a, x^{−a})` leaf-averaged, for `0 ≤ a < 1`.
pub fn a2_extremal_pair(lattice: &Lattice, a: f64) -> Result<(Weight, Weight)> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::param("a", format!("need 0 <= a < 1, got {a}")));
    }
    Ok((power_weight(lattice, a)?, power_weight(lattice, -a)?))
}
