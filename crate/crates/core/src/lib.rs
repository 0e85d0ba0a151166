//! Numerical machinery for two-weight bump conditions on finite martingale
//! lattices: bump gauges, distribution-function functionals, Bellman
//! functions, Haar shifts and paraproducts, and the embedding sums they are
//! controlled by.

pub mod bellman;
pub mod dyadic;
pub mod embedding;
pub mod error;
pub mod gauge;
pub mod numeric;
pub mod operators;
pub mod sampling;

pub use error::{Error, Result};
