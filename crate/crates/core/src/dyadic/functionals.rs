use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{orlicz_norm, BumpGauge, YoungFunction};

use super::lattice::{CellId, Lattice};
use super::step::dist_fns;

/// A supremum over cells together with the cell that attains it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMax {
    pub value: f64,
    pub cell: CellId,
}

fn argmax(values: impl Iterator<Item = f64>) -> CellMax {
    values.enumerate().fold(CellMax { value: 0.0, cell: 0 }, |best, (id, v)| {
        if v > best.value {
            CellMax { value: v, cell: id }
        } else {
            best
        }
    })
}

/// `n_Ψ(N_I^w)` for every cell.
pub fn n_psi_all(lattice: &Lattice, w: &[f64], gauge: &BumpGauge) -> Vec<f64> {
    dist_fns(lattice, w).iter().map(|n| n.n_psi(gauge)).collect()
}

/// `sup_I n_{Ψ₁}(N_I^v)·n_{Ψ₂}(N_I^w)`.
pub fn bump_constant(lattice: &Lattice, v: &[f64], w: &[f64], g1: &BumpGauge, g2: &BumpGauge) -> CellMax {
    let nv = n_psi_all(lattice, v, g1);
    let nw = n_psi_all(lattice, w, g2);
    argmax(nv.iter().zip(&nw).map(|(a, b)| a * b))
}

/// Divides `v` by the bump constant so the product is at most one on every
/// cell. Returns the factor used (1 when the constant vanishes).
pub fn normalize_bump(
    lattice: &Lattice,
    v: &mut [f64],
    w: &[f64],
    g1: &BumpGauge,
    g2: &BumpGauge,
) -> f64 {
    let rho = bump_constant(lattice, v, w, g1, g2).value;
    if rho > 0.0 {
        for x in v.iter_mut() {
            *x /= rho;
        }
        rho
    } else {
        1.0
    }
}

/// `sup_I ⟨v⟩_I^{1/2}⟨w⟩_I^{1/2}`.
pub fn a2_constant(lattice: &Lattice, v: &[f64], w: &[f64]) -> CellMax {
    let av = lattice.cell_averages(v);
    let aw = lattice.cell_averages(w);
    argmax(av.iter().zip(&aw).map(|(a, b)| (a * b).max(0.0).sqrt()))
}

/// `‖w‖_{L^Φ(I)}` on a single cell.
pub fn orlicz_norm_on(lattice: &Lattice, w: &[f64], cell: CellId, phi: &YoungFunction) -> f64 {
    let leaf0 = lattice.leaf_cell(0);
    let pairs: Vec<(f64, f64)> = lattice
        .cell(cell)
        .leaves
        .clone()
        .map(|k| (lattice.mass(leaf0 + k), w[k]))
        .collect();
    orlicz_norm(&pairs, phi)
}

/// `sup_I ‖v‖_{L^{Φ₁}(I)}‖w‖_{L^{Φ₂}(I)}`.
pub fn orlicz_bump_constant(
    lattice: &Lattice,
    v: &[f64],
    w: &[f64],
    phi1: &YoungFunction,
    phi2: &YoungFunction,
) -> CellMax {
    argmax((0..lattice.num_cells()).map(|id| {
        orlicz_norm_on(lattice, v, id, phi1) * orlicz_norm_on(lattice, w, id, phi2)
    }))
}

/// Nonnegative coefficients `a_I` satisfying the normalised Carleson
/// condition `Σ_{I′ ⊆ I} a_{I′}·mass(I′) ≤ mass(I)`.
#[derive(Debug, Clone)]
pub struct CarlesonSeq {
    coeffs: Vec<f64>,
    loads: Vec<f64>,
}

/// Slack allowed in the Carleson normalisation before rejecting.
pub const CARLESON_TOL: f64 = 1e-12;

impl CarlesonSeq {
    pub fn new(lattice: &Lattice, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != lattice.num_cells() {
            return Err(Error::invalid(format!(
                "expected {} Carleson coefficients, got {}",
                lattice.num_cells(),
                coeffs.len()
            )));
        }
        if let Some(id) = coeffs.iter().position(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::invalid(format!(
                "Carleson coefficient at cell '{}' is negative or non-finite",
                lattice.path(id)
            )));
        }
        let loads = loads(lattice, &coeffs);
        if let Some(id) = loads.iter().position(|&m| m > 1.0 + CARLESON_TOL) {
            return Err(Error::invalid(format!(
                "Carleson normalisation fails at cell '{}': load {}",
                lattice.path(id),
                loads[id]
            )));
        }
        Ok(Self { coeffs, loads })
    }

    /// Scales arbitrary nonnegative coefficients so the largest load is one.
    pub fn normalized(lattice: &Lattice, mut coeffs: Vec<f64>) -> Result<Self> {
        let peak = loads(lattice, &coeffs).into_iter().fold(0.0, f64::max);
        if peak > 0.0 {
            for a in &mut coeffs {
                *a /= peak;
            }
        }
        Self::new(lattice, coeffs)
    }

    pub fn zero(lattice: &Lattice) -> Self {
        let n = lattice.num_cells();
        Self {
            coeffs: vec![0.0; n],
            loads: vec![0.0; n],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, id: CellId) -> f64 {
        self.coeffs[id]
    }

    /// `M_I = mass(I)⁻¹ Σ_{I′ ⊆ I} a_{I′} mass(I′)` for every cell.
    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn load(&self, id: CellId) -> f64 {
        self.loads[id]
    }
}

/// `M_I = a_I + Σ_k α_k M_{I_k}`, evaluated bottom-up.
fn loads(lattice: &Lattice, a: &[f64]) -> Vec<f64> {
    let mut m = a.to_vec();
    for id in lattice.interior().rev() {
        let c = lattice.cell(id);
        let below: f64 = c.children.clone().map(|k| lattice.mass(k) * m[k]).sum();
        m[id] = a[id] + below / c.mass;
    }
    m
}

/// `M_I` for one cell, by direct summation over all subcells.
pub fn carleson_load(lattice: &Lattice, a: &CarlesonSeq, cell: CellId) -> f64 {
    let mut total = 0.0;
    for k in 0..=lattice.depth() - lattice.cell(cell).depth {
        for j in lattice.descendants(cell, k).expect("within depth") {
            total += a.coeff(j) * lattice.mass(j);
        }
    }
    total / lattice.mass(cell)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_weights() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(3, 2).unwrap();
        let ones = vec![1.0; 8];
        assert!((bump_constant(&lat, &ones, &ones, &g, &g).value - 4.0).abs() < 1e-12);
        assert_eq!(bump_constant(&lat, &[0.0; 8], &[0.0; 8], &g, &g).value, 0.0);
        assert!((a2_constant(&lat, &ones, &ones).value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rescaled_bump_is_normalised() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(4, 2).unwrap();
        let mut v: Vec<f64> = (0..16).map(|k| 1.0 + (k as f64 * 0.7).sin()).collect();
        let w: Vec<f64> = (0..16).map(|k| 0.1 + (k % 5) as f64).collect();
        let rho = normalize_bump(&lat, &mut v, &w, &g, &g);
        assert!(rho > 0.0);
        assert!(bump_constant(&lat, &v, &w, &g, &g).value <= 1.0 + 1e-12);
    }

    #[test]
    fn carleson_root_only() {
        let lat = Lattice::uniform(3, 2).unwrap();
        let mut a = vec![0.0; lat.num_cells()];
        a[0] = 1.0;
        let seq = CarlesonSeq::new(&lat, a).unwrap();
        assert_eq!(seq.load(0), 1.0);
        assert!(seq.loads()[1..].iter().all(|&m| m == 0.0));
        let z = CarlesonSeq::zero(&lat);
        assert!(z.loads().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn carleson_rejects_overload() {
        let lat = Lattice::uniform(2, 2).unwrap();
        let mut a = vec![0.0; lat.num_cells()];
        a[0] = 1.0;
        a[3] = 0.5;
        assert!(CarlesonSeq::new(&lat, a.clone()).is_err());
        a[0] = -0.1;
        assert!(CarlesonSeq::new(&lat, a).is_err());
    }

    #[test]
    fn carleson_recursion_matches_double_sum() {
        let lat = Lattice::with_fractions(4, &[0.3, 0.2, 0.5]).unwrap();
        let raw: Vec<f64> = (0..lat.num_cells()).map(|k| ((k * 31) % 7) as f64).collect();
        let seq = CarlesonSeq::normalized(&lat, raw).unwrap();
        for id in 0..lat.num_cells() {
            assert!((seq.load(id) - carleson_load(&lat, &seq, id)).abs() < 1e-12);
        }
    }

    #[test]
    fn orlicz_constant_weight() {
        let phi = YoungFunction::log_power(2.0).unwrap();
        let lat = Lattice::uniform(2, 2).unwrap();
        let n = orlicz_norm_on(&lat, &[3.0; 4], 0, &phi);
        assert!((n - 3.0 / phi.inverse_at_one()).abs() < 1e-10);
        assert_eq!(orlicz_norm_on(&lat, &[0.0; 4], 0, &phi), 0.0);
    }
}
