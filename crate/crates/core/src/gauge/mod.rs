//! Young functions, bump gauges and the auxiliary function `T(A, N)`.

mod bump;
mod tfunc;
mod young;

pub use bump::{unit_grid, BumpGauge, GaugeLaws, GaugeSpec};
pub use tfunc::{t_scalar, TValue};
pub(crate) use tfunc::t_unchecked;
pub use young::{orlicz_norm, YoungFunction};
