use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dyadic::{n_psi_all, CellId, Lattice};
use crate::error::Result;
use crate::gauge::BumpGauge;

use super::{HaarShift, LeafOperator, Paraproduct};

/// `⟨T(f w^{1/2}), g v^{1/2}⟩` in `L²(μ)`.
pub fn bilinear_form<T: LeafOperator + ?Sized>(
    lattice: &Lattice,
    op: &T,
    f: &[f64],
    g: &[f64],
    v: &[f64],
    w: &[f64],
) -> f64 {
    let fw = weighted(f, w);
    let gv = weighted(g, v);
    lattice.inner(&op.apply(lattice, &fw), &gv)
}

fn weighted(f: &[f64], w: &[f64]) -> Vec<f64> {
    f.iter().zip(w).map(|(a, b)| a * b.sqrt()).collect()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The complexity-`n` shift attaining the first domination step for this
/// `(f, g)`: `a_I(x, y) = mass(I)⁻¹ sgn Δ_I^n(g v^{1/2})(x) sgn Δ_I^n(f w^{1/2})(y)`.
pub fn worst_kernel(
    lattice: &Lattice,
    f: &[f64],
    g: &[f64],
    v: &[f64],
    w: &[f64],
    complexity: usize,
) -> Result<HaarShift> {
    let af = lattice.cell_averages(&weighted(f, w));
    let ag = lattice.cell_averages(&weighted(g, v));
    let kernels = (0..lattice.num_cells())
        .map(|id| {
            if !HaarShift::supports(lattice, id, complexity) {
                return None;
            }
            let df = lattice.delta_block(&af, id, complexity);
            let dg = lattice.delta_block(&ag, id, complexity);
            let b = 1.0 / lattice.mass(id);
            Some(DMatrix::from_fn(dg.len(), df.len(), |r, c| b * sign(dg[r]) * sign(df[c])))
        })
        .collect();
    HaarShift::new(lattice, complexity, kernels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationTerm {
    pub cell: CellId,
    pub term: f64,
}

/// The domination form and the two embedding sums it splits into:
/// `value ≤ Σ x_I y_I ≤ ½(t² Σx² + t⁻² Σy²) = √(Σx² Σy²)` at the optimal `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub value: f64,
    pub terms: Vec<DominationTerm>,
    /// Embedding sum carried by `f` and `w`.
    pub sum_w: f64,
    /// Embedding sum carried by `g` and `v`.
    pub sum_v: f64,
    /// Minimiser `t` of `t² sum_w + t⁻² sum_v`.
    pub t_opt: f64,
    /// `√(sum_w · sum_v)`.
    pub split: f64,
    pub norm_f: f64,
    pub norm_g: f64,
}

impl DominationReport {
    fn finish(value: f64, terms: Vec<DominationTerm>, sum_w: f64, sum_v: f64, norm_f: f64, norm_g: f64) -> Self {
        let t_opt = if sum_w > 0.0 && sum_v > 0.0 {
            (sum_v / sum_w).powf(0.25)
        } else {
            1.0
        };
        Self {
            value,
            terms,
            sum_w,
            sum_v,
            t_opt,
            split: (sum_w * sum_v).sqrt(),
            norm_f,
            norm_g,
        }
    }
}

/// `Σ_I mass(I)⁻¹ ‖Δ_I^n(f w^{1/2})‖₁ ‖Δ_I^n(g v^{1/2})‖₁`, with the weights
/// normalised so that `n_{Ψ₁}(N_I^w) n_{Ψ₂}(N_I^v) ≤ 1`.
#[allow(clippy::too_many_arguments)]
pub fn domination_form_shift(
    lattice: &Lattice,
    f: &[f64],
    g: &[f64],
    v: &[f64],
    w: &[f64],
    g1: &BumpGauge,
    g2: &BumpGauge,
    complexity: usize,
) -> DominationReport {
    let af = lattice.cell_averages(&weighted(f, w));
    let ag = lattice.cell_averages(&weighted(g, v));
    let nw = n_psi_all(lattice, w, g1);
    let nv = n_psi_all(lattice, v, g2);
    let (mut value, mut sum_w, mut sum_v) = (0.0, 0.0, 0.0);
    let mut terms = Vec::new();
    for id in 0..lattice.num_cells() {
        if !HaarShift::supports(lattice, id, complexity) {
            continue;
        }
        let mass = lattice.mass(id);
        let lf = lattice.delta_l1(&af, id, complexity);
        let lg = lattice.delta_l1(&ag, id, complexity);
        let term = lf * lg / mass;
        value += term;
        terms.push(DominationTerm { cell: id, term });
        if nw[id] > 0.0 {
            sum_w += lf * lf / (nw[id] * mass);
        }
        if nv[id] > 0.0 {
            sum_v += lg * lg / (nv[id] * mass);
        }
    }
    let norm_f = lattice.norm_sq(f).sqrt();
    let norm_g = lattice.norm_sq(g).sqrt();
    DominationReport::finish(value, terms, sum_w, sum_v, norm_f, norm_g)
}

/// `Σ_I |⟨f w^{1/2}⟩_I| ‖Δ_I b‖_∞ ‖Δ_I(g v^{1/2})‖₁`, split by
/// Cauchy–Schwarz into the Carleson sum for `(f, w)` and the difference sum
/// for `(g, v)`.
#[allow(clippy::too_many_arguments)]
pub fn domination_form_para(
    lattice: &Lattice,
    f: &[f64],
    g: &[f64],
    v: &[f64],
    w: &[f64],
    para: &Paraproduct,
    g1: &BumpGauge,
    g2: &BumpGauge,
) -> DominationReport {
    let af = lattice.cell_averages(&weighted(f, w));
    let ag = lattice.cell_averages(&weighted(g, v));
    let nw = n_psi_all(lattice, w, g1);
    let nv = n_psi_all(lattice, v, g2);
    let (mut value, mut sum_w, mut sum_v) = (0.0, 0.0, 0.0);
    let mut terms = Vec::new();
    for id in lattice.interior() {
        let a = para.carleson().coeff(id);
        let mass = lattice.mass(id);
        let lg = lattice.delta_l1(&ag, id, 1);
        let term = af[id].abs() * a.sqrt() * lg;
        value += term;
        terms.push(DominationTerm { cell: id, term });
        if nw[id] > 0.0 {
            sum_w += af[id] * af[id] * a * mass / nw[id];
        }
        if nv[id] > 0.0 {
            sum_v += lg * lg / (nv[id] * mass);
        }
    }
    let norm_f = lattice.norm_sq(f).sqrt();
    let norm_g = lattice.norm_sq(g).sqrt();
    DominationReport::finish(value, terms, sum_w, sum_v, norm_f, norm_g)
}
