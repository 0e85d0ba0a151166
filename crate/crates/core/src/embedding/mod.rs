//! The difference-sum and Carleson embedding sums, the telescoping ledgers
//! behind them, and an adversarial search for large ratios.

mod adversarial;
mod sums;
mod telescope;

pub use adversarial::{adversarial_ratio, AdversarialResult, RESTARTS};
pub use sums::{embed_sum_25, embed_sum_26, EmbeddingReport, RATIO_TOL};
pub use telescope::{ledger_roots, telescope_audit_25, telescope_audit_26, LedgerRow, TelescopeAudit};
