use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{CarlesonSeq, CellId, Lattice};
use crate::error::{Error, Result};

use super::LeafOperator;

/// `Πh = Σ_I ⟨h⟩_I Δ_I b`, with `b` given by its martingale differences:
/// one value per child of each interior cell, mean zero on the cell.
#[derive(Debug, Clone)]
pub struct Paraproduct {
    delta_b: Vec<Option<Vec<f64>>>,
    carleson: CarlesonSeq,
}

/// Wire form: `{"delta_b": {path: child values}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParaSpec {
    pub delta_b: BTreeMap<String, Vec<f64>>,
}

fn sup_sq(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs())).powi(2)
}

impl Paraproduct {
    /// Validates shapes, the mean-zero condition and the Carleson
    /// normalisation of `a_I = ‖Δ_I b‖_∞²`.
    pub fn new(lattice: &Lattice, delta_b: Vec<Option<Vec<f64>>>) -> Result<Self> {
        if delta_b.len() != lattice.num_cells() {
            return Err(Error::invalid("one Δb slot per cell required"));
        }
        let mut coeffs = vec![0.0; lattice.num_cells()];
        for (id, d) in delta_b.iter().enumerate() {
            let Some(d) = d else { continue };
            let path = lattice.path(id);
            let kids = lattice.cell(id).children.clone();
            if d.len() != kids.len() {
                return Err(Error::invalid(format!(
                    "Δb at '{path}' has {} values for {} children",
                    d.len(),
                    kids.len()
                )));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite Δb at '{path}'")));
            }
            let mean: f64 = kids.clone().zip(d).map(|(k, v)| lattice.mass(k) * v).sum::<f64>() / lattice.mass(id);
            let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if mean.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::invalid(format!("Δb at '{path}' is not mean zero (mean {mean})")));
            }
            coeffs[id] = sup_sq(d);
        }
        let carleson = CarlesonSeq::new(lattice, coeffs)
            .map_err(|e| Error::invalid(format!("paraproduct symbol violates the Carleson normalisation: {e}")))?;
        Ok(Self { delta_b, carleson })
    }

    pub fn zero(lattice: &Lattice) -> Self {
        Self {
            delta_b: vec![None; lattice.num_cells()],
            carleson: CarlesonSeq::zero(lattice),
        }
    }

    /// Random mean-zero differences with density `fill`, scaled so the
    /// largest Carleson load equals one.
    pub fn random<R: Rng>(rng: &mut R, lattice: &Lattice, fill: f64) -> Result<Self> {
        let mut raw: Vec<Option<Vec<f64>>> = lattice
            .cells()
            .iter()
            .enumerate()
            .map(|(id, c)| {
                if c.children.is_empty() || !rng.gen_bool(fill.clamp(0.0, 1.0)) {
                    return None;
                }
                let kids = c.children.clone();
                let vals: Vec<f64> = kids.clone().map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mean: f64 = kids.zip(&vals).map(|(k, v)| lattice.mass(k) * v).sum::<f64>() / lattice.mass(id);
                Some(vals.into_iter().map(|v| v - mean).collect())
            })
            .collect();
        let coeffs: Vec<f64> = raw.iter().map(|d| d.as_deref().map_or(0.0, sup_sq)).collect();
        let peak = CarlesonSeq::normalized(lattice, coeffs.clone())?;
        let scale = match coeffs.iter().zip(peak.coeffs()).find(|(c, _)| **c > 0.0) {
            Some((c, p)) => (p / c).sqrt(),
            None => 1.0,
        };
        for d in raw.iter_mut().flatten() {
            d.iter_mut().for_each(|v| *v *= scale);
        }
        Self::new(lattice, raw)
    }

    pub fn delta_b(&self, id: CellId) -> Option<&[f64]> {
        self.delta_b.get(id).and_then(|d| d.as_deref())
    }

    /// `a_I = ‖Δ_I b‖_∞²` with its loads.
    pub fn carleson(&self) -> &CarlesonSeq {
        &self.carleson
    }

    pub fn to_spec(&self, lattice: &Lattice) -> ParaSpec {
        ParaSpec {
            delta_b: self
                .delta_b
                .iter()
                .enumerate()
                .filter_map(|(id, d)| Some((lattice.path(id), d.clone()?)))
                .collect(),
        }
    }

    pub fn from_spec(lattice: &Lattice, spec: &ParaSpec) -> Result<Self> {
        let mut delta_b = vec![None; lattice.num_cells()];
        for (path, values) in &spec.delta_b {
            let id = lattice
                .cell_by_path(path)
                .ok_or_else(|| Error::invalid(format!("no cell at path '{path}'")))?;
            delta_b[id] = Some(values.clone());
        }
        Self::new(lattice, delta_b)
    }
}

impl LeafOperator for Paraproduct {
    fn apply(&self, lattice: &Lattice, h: &[f64]) -> Vec<f64> {
        let avg = lattice.cell_averages(h);
        let mut out = vec![0.0; h.len()];
        for (id, d) in self.delta_b.iter().enumerate() {
            let Some(d) = d else { continue };
            for (k, v) in lattice.cell(id).children.clone().zip(d) {
                for x in lattice.cell(k).leaves.clone() {
                    out[x] += avg[id] * v;
                }
            }
        }
        out
    }

    /// `Π* g = Σ_I mass(I)⁻¹ ⟨Δ_I b, g⟩ 1_I`.
    fn apply_adjoint(&self, lattice: &Lattice, g: &[f64]) -> Vec<f64> {
        let integrals = lattice.cell_integrals(g);
        let mut out = vec![0.0; g.len()];
        for (id, d) in self.delta_b.iter().enumerate() {
            let Some(d) = d else { continue };
            let pairing: f64 = lattice.cell(id).children.clone().zip(d).map(|(k, v)| v * integrals[k]).sum();
            let c = pairing / lattice.mass(id);
            for x in lattice.cell(id).leaves.clone() {
                out[x] += c;
            }
        }
        out
    }

    fn assemble(&self, lattice: &Lattice) -> DMatrix<f64> {
        let n = lattice.num_leaves();
        let leaf_mass = lattice.leaf_masses();
        let mut m = DMatrix::zeros(n, n);
        for (id, d) in self.delta_b.iter().enumerate() {
            let Some(d) = d else { continue };
            let cell_mass = lattice.mass(id);
            for (k, v) in lattice.cell(id).children.clone().zip(d) {
                for x in lattice.cell(k).leaves.clone() {
                    for y in lattice.cell(id).leaves.clone() {
                        m[(x, y)] += v * leaf_mass[y] / cell_mass;
                    }
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::trial_rng;

    #[test]
    fn single_root_difference() {
        let lat = Lattice::uniform(2, 2).unwrap();
        let mut d = vec![None; lat.num_cells()];
        d[0] = Some(vec![0.5, -0.5]);
        let p = Paraproduct::new(&lat, d).unwrap();
        let h = [1.0, 2.0, 3.0, 6.0];
        let out = p.apply(&lat, &h);
        assert_eq!(out, vec![1.5, 1.5, -1.5, -1.5]);
        assert!(Paraproduct::zero(&lat).apply(&lat, &h).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn validation() {
        let lat = Lattice::uniform(2, 2).unwrap();
        let mut d = vec![None; lat.num_cells()];
        d[0] = Some(vec![0.5, -0.4]);
        assert!(Paraproduct::new(&lat, d.clone()).is_err());
        d[0] = Some(vec![1.5, -1.5]);
        assert!(Paraproduct::new(&lat, d).is_err());
    }

    #[test]
    fn random_saturates_normalisation() {
        let lat = Lattice::with_fractions(5, &[0.4, 0.6]).unwrap();
        let p = Paraproduct::random(&mut trial_rng(2, 0), &lat, 0.7).unwrap();
        let peak = p.carleson().loads().iter().fold(0.0f64, |m, &v| m.max(v));
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_and_matrix() {
        let lat = Lattice::with_fractions(3, &[0.25, 0.75]).unwrap();
        let p = Paraproduct::random(&mut trial_rng(4, 0), &lat, 1.0).unwrap();
        let m = p.assemble(&lat);
        let f: Vec<f64> = (0..8).map(|k| (k as f64).cos()).collect();
        let g: Vec<f64> = (0..8).map(|k| (k as f64 * 0.3).sin()).collect();
        let pf = p.apply(&lat, &f);
        for x in 0..8 {
            let row: f64 = (0..8).map(|y| m[(x, y)] * f[y]).sum();
            assert!((row - pf[x]).abs() < 1e-12);
        }
        let lhs = lat.inner(&pf, &g);
        let rhs = lat.inner(&f, &p.apply_adjoint(&lat, &g));
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn spec_round_trip() {
        let lat = Lattice::uniform(3, 2).unwrap();
        let p = Paraproduct::random(&mut trial_rng(6, 0), &lat, 0.5).unwrap();
        let back = Paraproduct::from_spec(&lat, &p.to_spec(&lat)).unwrap();
        assert_eq!(p.assemble(&lat), back.assemble(&lat));
    }
}
