use serde::{Deserialize, Serialize};

use crate::dyadic::{n_psi_all, CarlesonSeq, Lattice};
use crate::gauge::BumpGauge;

/// Relative slack accepted when comparing a ratio with its bound.
pub const RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub total: f64,
    /// Contribution of each cell, indexed by cell id.
    pub per_cell: Vec<f64>,
    /// `per_generation[d]` sums the contributions of cells at depth `≤ d`.
    pub per_generation: Vec<f64>,
    /// `‖f‖²` in `L²(μ)`.
    pub norm_sq: f64,
    /// `total/‖f‖²`, zero for `f = 0`.
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

impl EmbeddingReport {
    fn from_terms(lattice: &Lattice, per_cell: Vec<f64>, f: &[f64], bound: f64) -> Self {
        let mut per_generation = vec![0.0; lattice.depth() + 1];
        for d in 0..=lattice.depth() {
            let level: f64 = lattice.level(d).map(|id| per_cell[id]).sum();
            per_generation[d] = level + if d > 0 { per_generation[d - 1] } else { 0.0 };
        }
        let total = *per_generation.last().expect("root level");
        let norm_sq = lattice.norm_sq(f);
        let ratio = if norm_sq > 0.0 { total / norm_sq } else { 0.0 };
        Self {
            total,
            per_cell,
            per_generation,
            norm_sq,
            ratio,
            bound,
            pass: ratio <= bound * (1.0 + RATIO_TOL),
        }
    }
}

pub(crate) fn f_sqrt_w(f: &[f64], w: &[f64]) -> Vec<f64> {
    f.iter().zip(w).map(|(a, b)| a * b.sqrt()).collect()
}

/// `Σ_I ‖Δ_I(f w^{1/2})‖₁² / (n_Ψ(N_I^w)·mass(I))`, skipping cells where `w ≡ 0`.
pub fn embed_sum_25(lattice: &Lattice, f: &[f64], w: &[f64], gauge: &BumpGauge) -> EmbeddingReport {
    let n = n_psi_all(lattice, w, gauge);
    embed_sum_25_with(lattice, f, w, &n, gauge.c_25())
}

pub(crate) fn embed_sum_25_with(lattice: &Lattice, f: &[f64], w: &[f64], n_psi: &[f64], bound: f64) -> EmbeddingReport {
    let avg = lattice.cell_averages(&f_sqrt_w(f, w));
    let per_cell = (0..lattice.num_cells())
        .map(|id| {
            if lattice.is_leaf(id) || n_psi[id] <= 0.0 {
                return 0.0;
            }
            let l1 = lattice.delta_l1(&avg, id, 1);
            l1 * l1 / (n_psi[id] * lattice.mass(id))
        })
        .collect();
    EmbeddingReport::from_terms(lattice, per_cell, f, bound)
}

/// `Σ_I ⟨f w^{1/2}⟩_I² a_I mass(I) / n_Ψ(N_I^w)`, skipping cells where `w ≡ 0`.
pub fn embed_sum_26(lattice: &Lattice, f: &[f64], w: &[f64], gauge: &BumpGauge, a: &CarlesonSeq) -> EmbeddingReport {
    let n = n_psi_all(lattice, w, gauge);
    let avg = lattice.cell_averages(&f_sqrt_w(f, w));
    let per_cell = (0..lattice.num_cells())
        .map(|id| {
            if n[id] <= 0.0 || a.coeff(id) == 0.0 {
                return 0.0;
            }
            avg[id] * avg[id] * a.coeff(id) * lattice.mass(id) / n[id]
        })
        .collect();
    EmbeddingReport::from_terms(lattice, per_cell, f, gauge.c_26())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(3, 2).unwrap();
        let r = embed_sum_25(&lat, &[0.0; 8], &[1.0; 8], &g);
        assert_eq!((r.total, r.ratio), (0.0, 0.0));
        assert!(r.pass);
    }

    #[test]
    fn single_haar_term() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(3, 2).unwrap();
        let f = [1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
        let r = embed_sum_25(&lat, &f, &[1.0; 8], &g);
        // ‖Δ_root f‖₁ = 1, n_Ψ = Ψ(1) = 2, mass 1.
        assert!((r.total - 0.5).abs() < 1e-13);
        assert!((r.per_cell[0] - 0.5).abs() < 1e-13);
        assert!((r.ratio - 0.5).abs() < 1e-13);
    }

    #[test]
    fn carleson_at_root() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(2, 2).unwrap();
        let mut a = vec![0.0; lat.num_cells()];
        a[0] = 1.0;
        let a = CarlesonSeq::new(&lat, a).unwrap();
        let f = [1.0, 2.0, -0.5, 0.3];
        let w = [1.0, 4.0, 0.25, 2.0];
        let r = embed_sum_26(&lat, &f, &w, &g, &a);
        let fw: f64 = f.iter().zip(&w).map(|(x, y)| x * y.sqrt()).sum::<f64>() / 4.0;
        let n = n_psi_all(&lat, &w, &g)[0];
        assert!((r.total - fw * fw / n).abs() < 1e-13);
        assert!(r.ratio <= 16.0);
        let z = embed_sum_26(&lat, &f, &w, &g, &CarlesonSeq::zero(&lat));
        assert_eq!(z.total, 0.0);
    }
}
