//! Finite martingale lattices, weights, distribution functions and the
//! cell-wise constants built from them.

mod functionals;
mod lattice;
mod step;
mod weights;

pub use functionals::{
    a2_constant, bump_constant, carleson_load, n_psi_all, normalize_bump, orlicz_bump_constant,
    orlicz_norm_on, CarlesonSeq, CellMax, CARLESON_TOL,
};
pub use lattice::{Cell, CellId, Lattice, MAX_LEAVES};
pub use step::{dist_fns, n_psi, DistFn, StepFn};
pub use weights::{a2_extremal_pair, power_weight, Weight, WeightKind, WeightSpec};
