//! The two Bellman functions `B̃(f, N)` and `B̃(f, N, M)`, their
//! derivatives, and checkers for the differential and finite-difference
//! inequalities they satisfy.

mod functional;
mod inequalities;
mod signs;

pub use functional::{
    b_hessian_form, b_tilde, b_tilde_mn, b_tilde_second, b_value, check_db_dm, check_perturbation,
    directional_derivs, u_of_mn, u_of_n, DbDmCheck, DerivReport, SecondDerivative, FD_STEP,
};
pub use inequalities::{
    check_drop, check_multi_point, check_two_point, BellmanPoint, DropCheck, MultiPointCheck, Slack,
    TwoPointCheck,
};
pub use signs::{
    balanced_signs, balanced_signs_greedy, balanced_signs_vertices, signed_value, weighted_l1,
    VERTEX_ENUMERATION_MAX,
};
