//! Haar shifts, paraproducts, two-weight norms and the bilinear forms that
//! dominate them.

use nalgebra::DMatrix;

use crate::dyadic::Lattice;

mod domination;
mod norm;
mod paraproduct;
mod shift;

pub use domination::{
    bilinear_form, domination_form_para, domination_form_shift, worst_kernel, DominationReport, DominationTerm,
};
pub use norm::{
    composed_matrix, two_weight_norm, two_weight_norm_dense, two_weight_norm_power, NormEstimate, NormMethod,
    DENSE_LIMIT,
};
pub use paraproduct::{ParaSpec, Paraproduct};
pub use shift::{decompose_complexity, HaarShift, ShiftPart, ShiftSpec, KERNEL_TOL};

/// A linear operator on leaf vectors of a lattice.
pub trait LeafOperator {
    fn apply(&self, lattice: &Lattice, h: &[f64]) -> Vec<f64>;
    /// Adjoint with respect to `⟨f, g⟩ = Σ μ(x) f(x) g(x)`.
    fn apply_adjoint(&self, lattice: &Lattice, h: &[f64]) -> Vec<f64>;
    /// Dense matrix `M` with `(Th)(x) = Σ_y M[x, y] h(y)`.
    fn assemble(&self, lattice: &Lattice) -> DMatrix<f64>;
}
