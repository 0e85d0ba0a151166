use serde::{Deserialize, Serialize};

use crate::bellman::{b_value, u_of_mn, u_of_n};
use crate::dyadic::{dist_fns, CarlesonSeq, CellId, Lattice};
use crate::error::Result;
use crate::gauge::BumpGauge;

use super::sums::f_sqrt_w;

/// One telescoping step for root cell `I⁰` and generation `n`:
/// `lhs = κ·Σ_{k<n} Σ_{I∈ch_k(I⁰)} term_I`,
/// `rhs = −mass(I⁰) B̃(I⁰) + Σ_{I∈ch_n(I⁰)} mass(I) B̃(I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub root: String,
    pub generation: usize,
    pub partial_lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelescopeAudit {
    pub rows: Vec<LedgerRow>,
    /// Smallest `rhs − lhs` over all rows.
    pub min_slack: f64,
    /// Smallest `C ∫_I |f|² − mass(I) B̃(I)` over all cells.
    pub min_cauchy_schwarz_slack: f64,
    /// Smallest `C ∫_{I⁰}|f|² − Σ_{ch_n(I⁰)} mass(I) B̃(I)` over all rows.
    pub min_closing_slack: f64,
    /// Constant in `B̃ ≤ C f²/u`.
    pub embedding_constant: f64,
}

impl TelescopeAudit {
    /// All slacks at least `−tol·(1 + |rhs|)`.
    pub fn holds(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.slack >= -tol * (1.0 + r.rhs.abs()))
            && self.min_cauchy_schwarz_slack >= -tol
            && self.min_closing_slack >= -tol
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("root,generation,partial_lhs,rhs,slack\n");
        for r in &self.rows {
            out.push_str(&format!(
                "\"{}\",{},{:e},{:e},{:e}\n",
                r.root, r.generation, r.partial_lhs, r.rhs, r.slack
            ));
        }
        out
    }
}

fn audit(
    lattice: &Lattice,
    f: &[f64],
    terms: &[f64],
    scale: f64,
    b_tilde: &[f64],
    embedding_constant: f64,
) -> TelescopeAudit {
    let f_sq: Vec<f64> = f.iter().map(|x| x * x).collect();
    let energy = lattice.cell_integrals(&f_sq);
    let mb: Vec<f64> = (0..lattice.num_cells()).map(|id| lattice.mass(id) * b_tilde[id]).collect();
    let mut rows = Vec::new();
    let mut min_slack = f64::INFINITY;
    let mut min_closing = f64::INFINITY;
    for root in 0..lattice.num_cells() {
        let path = lattice.path(root);
        let mut lhs = 0.0;
        for n in 1..=lattice.depth() - lattice.cell(root).depth {
            let above: f64 = lattice.descendants(root, n - 1).expect("within depth").map(|j| terms[j]).sum();
            lhs += scale * above;
            let bottom: f64 = lattice.descendants(root, n).expect("within depth").map(|j| mb[j]).sum();
            let rhs = bottom - mb[root];
            let slack = rhs - lhs;
            min_slack = min_slack.min(slack);
            min_closing = min_closing.min(embedding_constant * energy[root] - bottom);
            rows.push(LedgerRow {
                root: path.clone(),
                generation: n,
                partial_lhs: lhs,
                rhs,
                slack,
            });
        }
    }
    let min_cs = (0..lattice.num_cells())
        .map(|id| embedding_constant * energy[id] - mb[id])
        .fold(f64::INFINITY, f64::min);
    TelescopeAudit {
        rows,
        min_slack: if min_slack.is_finite() { min_slack } else { 0.0 },
        min_cauchy_schwarz_slack: min_cs,
        min_closing_slack: if min_closing.is_finite() { min_closing } else { 0.0 },
        embedding_constant,
    }
}

/// Telescoping ledger behind the difference-sum embedding: at every cell
/// `I⁰` and depth `n` below it, the `c/16`-weighted partial sum must not
/// exceed the Bellman increment.
pub fn telescope_audit_25(lattice: &Lattice, f: &[f64], w: &[f64], gauge: &BumpGauge, embedding_constant: f64) -> TelescopeAudit {
    let dists = dist_fns(lattice, w);
    let fw = lattice.cell_averages(&f_sqrt_w(f, w));
    let n: Vec<f64> = dists.iter().map(|d| d.n_psi(gauge)).collect();
    let terms: Vec<f64> = (0..lattice.num_cells())
        .map(|id| {
            if lattice.is_leaf(id) || n[id] <= 0.0 {
                return 0.0;
            }
            let l1 = lattice.delta_l1(&fw, id, 1);
            l1 * l1 / (n[id] * lattice.mass(id))
        })
        .collect();
    let b: Vec<f64> = dists
        .iter()
        .zip(&fw)
        .map(|(d, &x)| b_value(x, u_of_n(d, gauge)))
        .collect();
    audit(lattice, f, &terms, gauge.c() / 16.0, &b, embedding_constant)
}

/// Telescoping ledger behind the Carleson embedding, with `B̃(f, N, M)`
/// function evaluated at the loads `M_I`.
pub fn telescope_audit_26(
    lattice: &Lattice,
    f: &[f64],
    w: &[f64],
    gauge: &BumpGauge,
    a: &CarlesonSeq,
    embedding_constant: f64,
) -> Result<TelescopeAudit> {
    let dists = dist_fns(lattice, w);
    let fw = lattice.cell_averages(&f_sqrt_w(f, w));
    let mut terms = vec![0.0; lattice.num_cells()];
    let mut b = vec![0.0; lattice.num_cells()];
    for id in 0..lattice.num_cells() {
        let n = dists[id].n_psi(gauge);
        if n > 0.0 {
            terms[id] = a.coeff(id) * fw[id] * fw[id] * lattice.mass(id) / n;
        }
        b[id] = b_value(fw[id], u_of_mn(a.load(id).min(1.0), &dists[id], gauge)?);
    }
    Ok(audit(lattice, f, &terms, 1.0 / 16.0, &b, embedding_constant))
}

/// Cells in ledger order, for callers that need ids rather than paths.
pub fn ledger_roots(lattice: &Lattice) -> Vec<CellId> {
    (0..lattice.num_cells())
        .flat_map(|id| std::iter::repeat(id).take(lattice.depth() - lattice.cell(id).depth))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_carleson, random_leaf_vector, random_weight, trial_rng};

    #[test]
    fn zero_function_rows_vanish() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(3, 2).unwrap();
        let a = telescope_audit_25(&lat, &[0.0; 8], &[1.0; 8], &g, 1.0);
        assert!(a.rows.iter().all(|r| r.partial_lhs == 0.0 && r.rhs == 0.0));
        assert_eq!(a.rows.len(), ledger_roots(&lat).len());
    }

    #[test]
    fn random_instances_hold() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(3, 2).unwrap();
        for t in 0..50 {
            let mut rng = trial_rng(21, t);
            let f = random_leaf_vector(&mut rng, 8);
            let w = random_weight(&mut rng, &lat);
            let a25 = telescope_audit_25(&lat, &f, &w, &g, 1.0);
            assert!(a25.holds(1e-9), "{:?}", a25.min_slack);
            let c = random_carleson(&mut rng, &lat);
            let a26 = telescope_audit_26(&lat, &f, &w, &g, &c, 1.0).unwrap();
            assert!(a26.holds(1e-9), "{:?}", a26.min_slack);
        }
    }

    #[test]
    fn csv_header() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(1, 2).unwrap();
        let a = telescope_audit_25(&lat, &[1.0, -1.0], &[1.0, 1.0], &g, 1.0);
        let csv = a.csv();
        assert!(csv.starts_with("root,generation,partial_lhs,rhs,slack\n\"\",1,"));
    }
}
