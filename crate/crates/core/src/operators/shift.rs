use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{CellId, Lattice};
use crate::error::{Error, Result};

use super::LeafOperator;

/// Relative slack allowed in the kernel bound `‖a_I‖_∞ ≤ mass(I)⁻¹`.
pub const KERNEL_TOL: f64 = 1e-12;

/// Haar shift of complexity `n`: `S = Σ_I S_I` with `S_I = P_I K_I P_I`,
/// where `P_I = Δ_I^n` and `K_I` integrates against the block kernel
/// `a_I(J′, J)`, `J′, J ∈ ch_n(I)`. Rows index the output cell.
#[derive(Debug, Clone)]
pub struct HaarShift {
    complexity: usize,
    kernels: Vec<Option<DMatrix<f64>>>,
}

/// Wire form: `{"complexity": n, "kernels": {path: row-major block}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    pub complexity: usize,
    pub kernels: BTreeMap<String, Vec<f64>>,
}

impl HaarShift {
    /// Cells that can carry a kernel: `depth(I) + n ≤ D`.
    pub fn supports(lattice: &Lattice, id: CellId, complexity: usize) -> bool {
        lattice.cell(id).depth + complexity <= lattice.depth()
    }

    /// Builds a shift from per-cell blocks, validating shapes and the kernel bound.
    pub fn new(lattice: &Lattice, complexity: usize, kernels: Vec<Option<DMatrix<f64>>>) -> Result<Self> {
        if complexity == 0 {
            return Err(Error::param("complexity", "must be at least 1"));
        }
        if kernels.len() != lattice.num_cells() {
            return Err(Error::invalid("one kernel slot per cell required"));
        }
        for (id, k) in kernels.iter().enumerate() {
            let Some(k) = k else { continue };
            let path = lattice.path(id);
            if !Self::supports(lattice, id, complexity) {
                return Err(Error::invalid(format!(
                    "cell '{path}' is too deep for a complexity-{complexity} kernel"
                )));
            }
            let size = lattice.descendants(id, complexity)?.len();
            if k.nrows() != size || k.ncols() != size {
                return Err(Error::invalid(format!(
                    "kernel at '{path}' is {}x{}, expected {size}x{size}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            let bound = 1.0 / lattice.mass(id);
            let peak = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(peak <= bound * (1.0 + KERNEL_TOL)) {
                return Err(Error::invalid(format!(
                    "kernel at '{path}' has sup norm {peak} > 1/mass = {bound}"
                )));
            }
        }
        Ok(Self { complexity, kernels })
    }

    pub fn zero(lattice: &Lattice, complexity: usize) -> Result<Self> {
        Self::new(lattice, complexity, vec![None; lattice.num_cells()])
    }

    /// Kernel entries uniform in `[−mass(I)⁻¹, mass(I)⁻¹]`.
    pub fn random<R: Rng>(rng: &mut R, lattice: &Lattice, complexity: usize) -> Result<Self> {
        let kernels = (0..lattice.num_cells())
            .map(|id| {
                if !Self::supports(lattice, id, complexity) {
                    return None;
                }
                let size = lattice.descendants(id, complexity).ok()?.len();
                let b = 1.0 / lattice.mass(id);
                Some(DMatrix::from_fn(size, size, |_, _| rng.gen_range(-b..=b)))
            })
            .collect();
        Self::new(lattice, complexity, kernels)
    }

    pub fn complexity(&self) -> usize {
        self.complexity
    }

    pub fn kernel(&self, id: CellId) -> Option<&DMatrix<f64>> {
        self.kernels.get(id).and_then(|k| k.as_ref())
    }

    pub fn kernels(&self) -> &[Option<DMatrix<f64>>] {
        &self.kernels
    }

    /// The shift with transposed blocks, which is the adjoint in `L²(μ)`.
    pub fn transpose(&self) -> Self {
        Self {
            complexity: self.complexity,
            kernels: self.kernels.iter().map(|k| k.as_ref().map(|m| m.transpose())).collect(),
        }
    }

    /// `S_I` restricted to the `Δ_I^n` block: maps the vector of `Δ_I^n h`
    /// values on `ch_n(I)` to the values of `S_I h` there.
    pub fn block_action(&self, lattice: &Lattice, id: CellId, g: &[f64]) -> Vec<f64> {
        let Some(a) = self.kernel(id) else {
            return vec![0.0; g.len()];
        };
        let kids = lattice.descendants(id, self.complexity).expect("validated");
        let masses: Vec<f64> = kids.map(|j| lattice.mass(j)).collect();
        let total = lattice.mass(id);
        let weighted: Vec<f64> = g.iter().zip(&masses).map(|(x, m)| x * m).collect();
        let k: Vec<f64> = (0..g.len())
            .map(|r| (0..g.len()).map(|c| a[(r, c)] * weighted[c]).sum())
            .collect();
        let mean: f64 = k.iter().zip(&masses).map(|(x, m)| x * m).sum::<f64>() / total;
        k.into_iter().map(|x| x - mean).collect()
    }

    /// `S_I` as a matrix on `ch_n(I)` block values:
    /// `C = (1 − 𝟙αᵀ) A diag(mass) (1 − 𝟙αᵀ)` with `α_J = mass(J)/mass(I)`.
    fn block_matrix(&self, lattice: &Lattice, id: CellId) -> Option<DMatrix<f64>> {
        let a = self.kernel(id)?;
        let kids = lattice.descendants(id, self.complexity).expect("validated");
        let masses: Vec<f64> = kids.map(|j| lattice.mass(j)).collect();
        let size = masses.len();
        let total = lattice.mass(id);
        let proj = DMatrix::from_fn(size, size, |r, c| {
            (if r == c { 1.0 } else { 0.0 }) - masses[c] / total
        });
        let am = DMatrix::from_fn(size, size, |r, c| a[(r, c)] * masses[c]);
        Some(&proj * am * &proj)
    }

    pub fn to_spec(&self, lattice: &Lattice) -> ShiftSpec {
        let kernels = self
            .kernels
            .iter()
            .enumerate()
            .filter_map(|(id, k)| {
                let k = k.as_ref()?;
                let row_major = (0..k.nrows()).flat_map(|r| (0..k.ncols()).map(move |c| k[(r, c)])).collect();
                Some((lattice.path(id), row_major))
            })
            .collect();
        ShiftSpec {
            complexity: self.complexity,
            kernels,
        }
    }

    pub fn from_spec(lattice: &Lattice, spec: &ShiftSpec) -> Result<Self> {
        let mut kernels = vec![None; lattice.num_cells()];
        for (path, values) in &spec.kernels {
            let id = lattice
                .cell_by_path(path)
                .ok_or_else(|| Error::invalid(format!("no cell at path '{path}'")))?;
            if !Self::supports(lattice, id, spec.complexity) {
                return Err(Error::invalid(format!("cell '{path}' is too deep for this complexity")));
            }
            let size = lattice.descendants(id, spec.complexity)?.len();
            if values.len() != size * size {
                return Err(Error::invalid(format!(
                    "kernel at '{path}' has {} entries, expected {}",
                    values.len(),
                    size * size
                )));
            }
            kernels[id] = Some(DMatrix::from_row_slice(size, size, values));
        }
        Self::new(lattice, spec.complexity, kernels)
    }
}

impl LeafOperator for HaarShift {
    fn apply(&self, lattice: &Lattice, h: &[f64]) -> Vec<f64> {
        let avg = lattice.cell_averages(h);
        let mut out = vec![0.0; h.len()];
        for (id, k) in self.kernels.iter().enumerate() {
            if k.is_none() {
                continue;
            }
            let g = lattice.delta_block(&avg, id, self.complexity);
            let s = self.block_action(lattice, id, &g);
            let kids = lattice.descendants(id, self.complexity).expect("validated");
            for (j, val) in kids.zip(s) {
                for x in lattice.cell(j).leaves.clone() {
                    out[x] += val;
                }
            }
        }
        out
    }

    fn apply_adjoint(&self, lattice: &Lattice, h: &[f64]) -> Vec<f64> {
        self.transpose().apply(lattice, h)
    }

    fn assemble(&self, lattice: &Lattice) -> DMatrix<f64> {
        let leaves = lattice.num_leaves();
        let leaf_mass = lattice.leaf_masses();
        let mut m = DMatrix::zeros(leaves, leaves);
        for id in 0..self.kernels.len() {
            let Some(c) = self.block_matrix(lattice, id) else { continue };
            let kids: Vec<CellId> = lattice.descendants(id, self.complexity).expect("validated").collect();
            for (r, &jr) in kids.iter().enumerate() {
                for (col, &jc) in kids.iter().enumerate() {
                    let coef = c[(r, col)] / lattice.mass(jc);
                    if coef == 0.0 {
                        continue;
                    }
                    for y in lattice.cell(jc).leaves.clone() {
                        let v = coef * leaf_mass[y];
                        for x in lattice.cell(jr).leaves.clone() {
                            m[(x, y)] += v;
                        }
                    }
                }
            }
        }
        m
    }
}

/// One summand of a complexity decomposition: a complexity-1 shift on a
/// coarsened lattice with the same leaves as the original.
#[derive(Debug, Clone)]
pub struct ShiftPart {
    pub lattice: Lattice,
    pub shift: HaarShift,
    /// Original cell behind each coarse cell.
    pub origin: Vec<CellId>,
}

/// Splits a complexity-`n` shift into `n` complexity-1 shifts, part `k`
/// carrying the cells at depths `≡ k (mod n)` on the lattice with
/// generations `0, k, k + n, k + 2n, …, D`.
pub fn decompose_complexity(lattice: &Lattice, shift: &HaarShift) -> Result<Vec<ShiftPart>> {
    let n = shift.complexity;
    let depth = lattice.depth();
    let mut parts = Vec::with_capacity(n);
    for k in 0..n {
        let mut levels = vec![0];
        let mut d = if k == 0 { n } else { k };
        while d < depth {
            levels.push(d);
            d += n;
        }
        if depth > 0 {
            levels.push(depth);
        }
        levels.dedup();
        let (coarse, origin) = Lattice::build_tagged(
            lattice.mass(lattice.root()),
            lattice.root(),
            levels.len() - 1,
            |g, _, &orig| {
                let step = levels[g + 1] - levels[g];
                lattice
                    .descendants(orig, step)
                    .expect("levels within depth")
                    .map(|j| (lattice.mass(j), j))
                    .collect()
            },
        )?;
        let kernels = origin
            .iter()
            .enumerate()
            .map(|(cid, &orig)| {
                let d = lattice.cell(orig).depth;
                let carries = d % n == k && coarse.cell(cid).depth < coarse.depth();
                if carries && levels.get(coarse.cell(cid).depth + 1) == Some(&(d + n)) {
                    shift.kernel(orig).cloned()
                } else {
                    None
                }
            })
            .collect();
        parts.push(ShiftPart {
            shift: HaarShift::new(&coarse, 1, kernels)?,
            lattice: coarse,
            origin,
        });
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::trial_rng;

    #[test]
    fn hand_two_by_two() {
        let lat = Lattice::uniform(1, 2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let s = HaarShift::new(&lat, 1, vec![Some(a), None, None]).unwrap();
        // The antisymmetric block sends the Haar function to a constant,
        // which the outer projection removes.
        let m = s.assemble(&lat);
        let want = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        assert!((m - want).abs().max() < 1e-15);
        let sym = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let s2 = HaarShift::new(&lat, 1, vec![Some(sym), None, None]).unwrap();
        let m2 = s2.assemble(&lat);
        let want2 = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((m2 - want2).abs().max() < 1e-15);
    }

    #[test]
    fn assembly_matches_apply() {
        let lat = Lattice::with_fractions(4, &[0.3, 0.7]).unwrap();
        let mut rng = trial_rng(3, 0);
        for n in 1..=3 {
            let s = HaarShift::random(&mut rng, &lat, n).unwrap();
            let m = s.assemble(&lat);
            for y in 0..lat.num_leaves() {
                let mut e = vec![0.0; lat.num_leaves()];
                e[y] = 1.0;
                let col = s.apply(&lat, &e);
                for x in 0..lat.num_leaves() {
                    assert!((col[x] - m[(x, y)]).abs() < 1e-12);
                }
            }
            let ones = vec![1.0; lat.num_leaves()];
            assert!(s.apply(&lat, &ones).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn rejects_large_kernel() {
        let lat = Lattice::uniform(1, 2).unwrap();
        let a = DMatrix::from_element(2, 2, 1.5);
        assert!(HaarShift::new(&lat, 1, vec![Some(a), None, None]).is_err());
        let b = DMatrix::from_element(3, 3, 0.5);
        assert!(HaarShift::new(&lat, 1, vec![Some(b), None, None]).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let lat = Lattice::uniform(3, 2).unwrap();
        let s = HaarShift::random(&mut trial_rng(5, 1), &lat, 2).unwrap();
        let spec = s.to_spec(&lat);
        assert!(spec.kernels.contains_key("") && spec.kernels.contains_key("1"));
        let back = HaarShift::from_spec(&lat, &spec).unwrap();
        assert!((s.assemble(&lat) - back.assemble(&lat)).abs().max() == 0.0);
    }

    #[test]
    fn decomposition_reassembles() {
        let lat = Lattice::uniform(4, 2).unwrap();
        let mut rng = trial_rng(11, 0);
        for n in 1..=4 {
            let s = HaarShift::random(&mut rng, &lat, n).unwrap();
            let parts = decompose_complexity(&lat, &s).unwrap();
            assert_eq!(parts.len(), n);
            let mut sum = DMatrix::zeros(16, 16);
            for p in &parts {
                assert_eq!(p.lattice.num_leaves(), 16);
                sum += p.shift.assemble(&p.lattice);
            }
            assert!((sum - s.assemble(&lat)).abs().max() < 1e-12, "n = {n}");
        }
    }
}
