use std::path::Path;

use anyhow::{bail, Context, Result};
use bumpcert_core::dyadic::{Lattice, WeightSpec};
use bumpcert_core::gauge::{BumpGauge, GaugeSpec};
use bumpcert_core::operators::{ParaSpec, ShiftSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Largest admissible `depth·log₂(branching)`.
pub const MAX_LOG2_LEAVES: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branching: Option<usize>,
    /// Child mass fractions, identical at every cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            depth: default_depth(),
            branching: None,
            masses: None,
        }
    }
}

impl LatticeSpec {
    pub fn branching(&self) -> usize {
        match (&self.masses, self.branching) {
            (Some(m), _) => m.len(),
            (None, Some(b)) => b,
            (None, None) => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            bail!("lattice.depth: must be at least 1");
        }
        if let (Some(m), Some(b)) = (&self.masses, self.branching) {
            if m.len() != b {
                bail!("lattice.masses: {} fractions given but lattice.branching = {b}", m.len());
            }
        }
        if let Some(m) = &self.masses {
            if m.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                bail!("lattice.masses: fractions must be positive and finite");
            }
            let total: f64 = m.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                bail!("lattice.masses: fractions sum to {total}, expected 1");
            }
        }
        let b = self.branching();
        if b < 2 {
            bail!("lattice.branching: must be at least 2");
        }
        let log_leaves = self.depth as f64 * (b as f64).log2();
        if log_leaves > MAX_LOG2_LEAVES + 1e-12 {
            bail!(
                "lattice: depth·log2(branching) = {log_leaves:.3} exceeds the leaf-count guard {MAX_LOG2_LEAVES}"
            );
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Lattice> {
        let lat = match &self.masses {
            Some(m) => Lattice::with_fractions(self.depth, m),
            None => Lattice::uniform(self.depth, self.branching()),
        };
        lat.context("lattice")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<WeightSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorConfig {
    /// Random admissible shifts, or the extremal kernel for random `(f, g)`.
    Shift {
        #[serde(default = "one")]
        complexity: usize,
        #[serde(default)]
        extremal: bool,
    },
    /// Random paraproducts; `fill` is the fraction of cells carrying a symbol.
    Paraproduct {
        #[serde(default = "half")]
        fill: f64,
    },
    ExplicitShift { spec: ShiftSpec },
    ExplicitParaproduct { spec: ParaSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Gauge paired with `w`. Defaults to the log gauge with exponent `alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeSpec>,
    /// Gauge paired with `v`. Defaults to `gauge`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge2: Option<GaugeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorConfig>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Constant `C` in `B̃ ≤ C f²/u` used by the telescope closing step.
    #[serde(default = "one_f")]
    pub embedding_constant: f64,
    /// Largest number of children in the multi-point suite.
    #[serde(default = "default_children")]
    pub max_children: usize,
    /// Largest number of pieces of a sampled distribution function.
    #[serde(default = "default_pieces")]
    pub max_pieces: usize,
    /// Trials whose full telescope ledger is written.
    #[serde(default = "one_u64")]
    pub ledger_trials: u64,
}

fn default_depth() -> usize {
    8
}
fn default_trials() -> u64 {
    100
}
fn default_tolerance() -> f64 {
    1e-9
}
fn default_children() -> usize {
    16
}
fn default_pieces() -> usize {
    8
}
fn one() -> usize {
    1
}
fn one_u64() -> u64 {
    1
}
fn one_f() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| anyhow::anyhow!("{e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            bail!("tolerance: must be positive, got {}", self.tolerance);
        }
        if let (Some(a), Some(g)) = (self.alpha, self.gauge) {
            if a != g.alpha() {
                bail!("alpha: {a} conflicts with gauge.alpha = {}", g.alpha());
            }
        }
        if !(self.embedding_constant > 0.0 && self.embedding_constant.is_finite()) {
            bail!("embedding_constant: must be positive");
        }
        if self.max_children < 2 {
            bail!("max_children: must be at least 2");
        }
        if self.max_pieces < 1 {
            bail!("max_pieces: must be at least 1");
        }
        self.lattice.validate()?;
        match &self.operator {
            Some(OperatorConfig::Shift { complexity, .. }) => {
                if *complexity == 0 || *complexity > self.lattice.depth {
                    bail!(
                        "operator.complexity: must lie in 1..={}, got {complexity}",
                        self.lattice.depth
                    );
                }
            }
            Some(OperatorConfig::Paraproduct { fill }) => {
                if !(0.0..=1.0).contains(fill) {
                    bail!("operator.fill: must lie in [0, 1], got {fill}");
                }
            }
            _ => {}
        }
        let (g1, g2) = self.gauge_specs();
        g1.build().context("gauge")?;
        g2.build().context("gauge2")?;
        Ok(())
    }

    pub fn gauge_specs(&self) -> (GaugeSpec, GaugeSpec) {
        let g1 = self.gauge.unwrap_or(GaugeSpec::Log {
            alpha: self.alpha.unwrap_or(2.0),
        });
        (g1, self.gauge2.unwrap_or(g1))
    }

    pub fn gauges(&self) -> Result<(BumpGauge, BumpGauge)> {
        let (g1, g2) = self.gauge_specs();
        Ok((g1.build()?, g2.build()?))
    }

    /// SHA-256 of the canonical serialization, after command-line overrides.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
