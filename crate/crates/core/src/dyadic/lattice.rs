use std::ops::Range;

use crate::error::{Error, Result};

pub type CellId = usize;

/// Largest number of leaves a lattice may have.
pub const MAX_LEAVES: usize = 1 << 22;

#[derive(Debug, Clone)]
pub struct Cell {
    pub mass: f64,
    pub depth: usize,
    pub parent: Option<CellId>,
    /// Children occupy a contiguous id range.
    pub children: Range<CellId>,
    /// Leaf indices covered by this cell.
    pub leaves: Range<usize>,
    /// Position among the parent's children.
    pub slot: usize,
}

/// A finite martingale filtration: a rooted tree of cells with positive
/// masses where every cell's mass is the sum of its children's, and all
/// leaves sit at the same depth.
///
/// Cells are stored generation by generation, left to right, so the cells of
/// one generation below a given cell form a contiguous id range and the
/// leaves are the last generation in document order.
#[derive(Debug, Clone)]
pub struct Lattice {
    cells: Vec<Cell>,
    level_start: Vec<CellId>,
    depth: usize,
}

impl Lattice {
    /// Equal-mass lattice with root mass 1 and `branching` children per cell.
    pub fn uniform(depth: usize, branching: usize) -> Result<Self> {
        if branching == 0 {
            return Err(Error::param("branching", "must be at least 1"));
        }
        let fractions = vec![1.0 / branching as f64; branching];
        Self::with_fractions(depth, &fractions)
    }

    /// Every cell splits into children with mass proportional to `fractions`.
    pub fn with_fractions(depth: usize, fractions: &[f64]) -> Result<Self> {
        if fractions.is_empty() || fractions.iter().any(|&f| !(f > 0.0 && f.is_finite())) {
            return Err(Error::param("masses", "child fractions must be positive"));
        }
        let total: f64 = fractions.iter().sum();
        Self::build(1.0, depth, |_, mass| {
            fractions.iter().map(|f| mass * f / total).collect()
        })
    }

    /// Generic constructor: `split(depth, mass)` returns the child masses of a
    /// cell. The last child's mass is adjusted so children sum to the parent.
    pub fn build<F>(root_mass: f64, depth: usize, mut split: F) -> Result<Self>
    where
        F: FnMut(usize, f64) -> Vec<f64>,
    {
        let (lattice, _) = Self::build_tagged(root_mass, (), depth, |d, m, _| {
            split(d, m).into_iter().map(|c| (c, ())).collect()
        })?;
        Ok(lattice)
    }

    /// Like [`build`](Self::build), but threads a tag through the tree so the
    /// caller can map constructed cells back to its own objects.
    pub fn build_tagged<T, F>(
        root_mass: f64,
        root_tag: T,
        depth: usize,
        mut split: F,
    ) -> Result<(Self, Vec<T>)>
    where
        T: Clone,
        F: FnMut(usize, f64, &T) -> Vec<(f64, T)>,
    {
        if !(root_mass > 0.0 && root_mass.is_finite()) {
            return Err(Error::param("root_mass", "must be positive"));
        }
        let mut cells = vec![Cell {
            mass: root_mass,
            depth: 0,
            parent: None,
            children: 0..0,
            leaves: 0..0,
            slot: 0,
        }];
        let mut tags = vec![root_tag];
        let mut level_start = vec![0];
        for d in 0..depth {
            let (lo, hi) = (level_start[d], cells.len());
            level_start.push(hi);
            for id in lo..hi {
                let mass = cells[id].mass;
                let mut kids = split(d, mass, &tags[id]);
                if kids.is_empty() {
                    return Err(Error::invalid(format!(
                        "cell at depth {d} has no children but the lattice depth is {depth}"
                    )));
                }
                let head: f64 = kids[..kids.len() - 1].iter().map(|k| k.0).sum();
                let last = kids.len() - 1;
                kids[last].0 = mass - head;
                if kids.iter().any(|k| !(k.0 > 0.0)) {
                    return Err(Error::invalid(format!(
                        "non-positive child mass under a cell at depth {d}"
                    )));
                }
                let first = cells.len();
                for (slot, (m, tag)) in kids.into_iter().enumerate() {
                    cells.push(Cell {
                        mass: m,
                        depth: d + 1,
                        parent: Some(id),
                        children: 0..0,
                        leaves: 0..0,
                        slot,
                    });
                    tags.push(tag);
                }
                cells[id].children = first..cells.len();
            }
            if cells.len() - level_start[d + 1] > MAX_LEAVES {
                return Err(Error::param("depth", format!("more than {MAX_LEAVES} leaves")));
            }
        }
        // Leaf ranges, bottom-up.
        let leaf_start = *level_start.last().expect("root level");
        for id in (0..cells.len()).rev() {
            cells[id].leaves = if cells[id].depth == depth {
                let k = id - leaf_start;
                k..k + 1
            } else {
                let c = cells[id].children.clone();
                cells[c.start].leaves.start..cells[c.end - 1].leaves.end
            };
        }
        Ok((
            Self {
                cells,
                level_start,
                depth,
            },
            tags,
        ))
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root(&self) -> CellId {
        0
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.cells.len() - self.level_start[self.depth]
    }

    pub fn mass(&self, id: CellId) -> f64 {
        self.cells[id].mass
    }

    /// Ids of the cells at generation `d`.
    pub fn level(&self, d: usize) -> Range<CellId> {
        let end = if d == self.depth {
            self.cells.len()
        } else {
            self.level_start[d + 1]
        };
        self.level_start[d]..end
    }

    /// Cell id of leaf `k`.
    pub fn leaf_cell(&self, k: usize) -> CellId {
        self.level_start[self.depth] + k
    }

    /// Leaf masses in document order.
    pub fn leaf_masses(&self) -> Vec<f64> {
        self.level(self.depth).map(|id| self.cells[id].mass).collect()
    }

    pub fn is_leaf(&self, id: CellId) -> bool {
        self.cells[id].depth == self.depth
    }

    /// Cells strictly above leaf level.
    pub fn interior(&self) -> Range<CellId> {
        0..self.level_start[self.depth]
    }

    /// `ch_k(I)` as a contiguous id range.
    pub fn descendants(&self, id: CellId, k: usize) -> Result<Range<CellId>> {
        let d = self.cells[id].depth;
        if d + k > self.depth {
            return Err(Error::Range {
                requested: d + k,
                depth: self.depth,
            });
        }
        let mut range = id..id + 1;
        for _ in 0..k {
            let first = self.cells[range.start].children.start;
            let last = self.cells[range.end - 1].children.end;
            range = first..last;
        }
        Ok(range)
    }

    /// Child-index digits from the root, e.g. `"010"`.
    pub fn path(&self, id: CellId) -> String {
        let mut digits = Vec::with_capacity(self.cells[id].depth);
        let mut cur = id;
        while let Some(p) = self.cells[cur].parent {
            digits.push(self.cells[cur].slot);
            cur = p;
        }
        digits
            .iter()
            .rev()
            .map(|&d| std::char::from_digit(d as u32, 36).unwrap_or('?'))
            .collect()
    }

    pub fn cell_by_path(&self, path: &str) -> Option<CellId> {
        let mut cur = self.root();
        for ch in path.chars() {
            let slot = ch.to_digit(36)? as usize;
            let kids = self.cells[cur].children.clone();
            if slot >= kids.len() {
                return None;
            }
            cur = kids.start + slot;
        }
        Some(cur)
    }

    /// Relative defect of `mass(I) = Σ mass(children)`, maximised over cells.
    pub fn mass_additivity_defect(&self) -> f64 {
        self.interior()
            .map(|id| {
                let c = &self.cells[id];
                let sum: f64 = c.children.clone().map(|k| self.cells[k].mass).sum();
                (sum - c.mass).abs() / c.mass
            })
            .fold(0.0, f64::max)
    }

    /// `∫_I f dμ` for every cell, accumulated bottom-up from leaf values.
    pub fn cell_integrals(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.num_leaves(), "leaf vector length");
        let mut out = vec![0.0; self.cells.len()];
        let leaf0 = self.level_start[self.depth];
        for (k, v) in f.iter().enumerate() {
            out[leaf0 + k] = v * self.cells[leaf0 + k].mass;
        }
        for id in (0..leaf0).rev() {
            out[id] = self.cells[id].children.clone().map(|c| out[c]).sum();
        }
        out
    }

    /// `⟨f⟩_I` for every cell.
    pub fn cell_averages(&self, f: &[f64]) -> Vec<f64> {
        let mut out = self.cell_integrals(f);
        for (v, c) in out.iter_mut().zip(&self.cells) {
            *v /= c.mass;
        }
        out
    }

    /// `⟨f⟩_I` by direct summation over the leaves of `I`.
    pub fn average(&self, f: &[f64], id: CellId) -> f64 {
        let c = &self.cells[id];
        let leaf0 = self.level_start[self.depth];
        c.leaves
            .clone()
            .map(|k| f[k] * self.cells[leaf0 + k].mass)
            .sum::<f64>()
            / c.mass
    }

    /// `E_I f = ⟨f⟩_I·1_I`.
    pub fn apply_e(&self, id: CellId, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        let avg = self.average(f, id);
        for k in self.cells[id].leaves.clone() {
            out[k] = avg;
        }
        out
    }

    /// `Δ_I f = −E_I f + Σ_{J ∈ ch(I)} E_J f`.
    pub fn apply_delta(&self, id: CellId, f: &[f64]) -> Result<Vec<f64>> {
        self.apply_delta_n(id, 1, f)
    }

    /// `Δ_I^n f = −E_I f + Σ_{J ∈ ch_n(I)} E_J f`.
    pub fn apply_delta_n(&self, id: CellId, n: usize, f: &[f64]) -> Result<Vec<f64>> {
        let kids = self.descendants(id, n)?;
        let mut out = vec![0.0; f.len()];
        let avg = self.average(f, id);
        for j in kids {
            let a = self.average(f, j) - avg;
            for k in self.cells[j].leaves.clone() {
                out[k] = a;
            }
        }
        Ok(out)
    }

    /// Values of `Δ_I^n f` on the cells of `ch_n(I)`, given all cell averages.
    pub(crate) fn delta_block(&self, averages: &[f64], id: CellId, n: usize) -> Vec<f64> {
        let kids = self.descendants(id, n).expect("caller checks depth");
        kids.map(|j| averages[j] - averages[id]).collect()
    }

    /// `‖Δ_I^n f‖_{L¹}` from cell averages.
    pub(crate) fn delta_l1(&self, averages: &[f64], id: CellId, n: usize) -> f64 {
        let kids = self.descendants(id, n).expect("caller checks depth");
        kids.map(|j| (averages[j] - averages[id]).abs() * self.cells[j].mass)
            .sum()
    }

    /// Leaf positions in `[0, 1)`: `(start, end)` of each leaf as a fraction of the root mass.
    pub fn leaf_intervals(&self) -> Vec<(f64, f64)> {
        let total = self.cells[0].mass;
        let mut acc = 0.0;
        self.leaf_masses()
            .into_iter()
            .map(|m| {
                let lo = acc;
                acc += m;
                (lo / total, (acc / total).min(1.0))
            })
            .collect()
    }

    /// `Σ_x μ(x) f(x) g(x)`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let leaf0 = self.level_start[self.depth];
        f.iter()
            .zip(g)
            .enumerate()
            .map(|(k, (a, b))| a * b * self.cells[leaf0 + k].mass)
            .sum()
    }

    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        self.inner(f, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn uniform_binary_shape() {
        let lat = Lattice::uniform(3, 2).unwrap();
        assert_eq!(lat.num_leaves(), 8);
        assert_eq!(lat.num_cells(), 15);
        assert_eq!(lat.level(2), 3..7);
        assert_eq!(lat.path(lat.leaf_cell(5)), "101");
        assert_eq!(lat.cell_by_path("101"), Some(lat.leaf_cell(5)));
        assert_eq!(lat.cell_by_path("2"), None);
        assert!(lat.mass_additivity_defect() < 1e-15);
    }

    #[test]
    fn leaves_partition_root() {
        let lat = Lattice::with_fractions(4, &[0.2, 0.5, 0.3]).unwrap();
        let sum: f64 = lat.leaf_masses().iter().sum();
        assert!((sum - 1.0).abs() < 1e-14);
        for d in 0..=lat.depth() {
            let covered: usize = lat.level(d).map(|c| lat.cell(c).leaves.len()).sum();
            assert_eq!(covered, lat.num_leaves());
        }
        assert!(lat.mass_additivity_defect() < 1e-15);
    }

    #[test]
    fn delta_kills_constants() {
        let lat = Lattice::with_fractions(3, &[0.3, 0.7]).unwrap();
        let ones = vec![1.0; lat.num_leaves()];
        for id in lat.interior() {
            assert!(lat.apply_delta(id, &ones).unwrap().iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn delta_hand_example() {
        let lat = Lattice::uniform(1, 2).unwrap();
        assert_eq!(lat.apply_delta(0, &[1.0, 3.0]).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn delta_n_telescopes() {
        let lat = Lattice::with_fractions(4, &[0.25, 0.35, 0.4]).unwrap();
        let f: Vec<f64> = (0..lat.num_leaves()).map(|k| ((k * 7919) % 13) as f64 - 5.0).collect();
        for n in 1..=3 {
            for id in lat.level(1) {
                let direct = lat.apply_delta_n(id, n, &f).unwrap();
                let mut sum = vec![0.0; f.len()];
                for k in 0..n {
                    for j in lat.descendants(id, k).unwrap() {
                        for (s, d) in sum.iter_mut().zip(lat.apply_delta(j, &f).unwrap()) {
                            *s += d;
                        }
                    }
                }
                assert!(approx_eq(&direct, &sum, 1e-12));
            }
        }
    }

    #[test]
    fn delta_n_depth_overflow() {
        let lat = Lattice::uniform(3, 2).unwrap();
        let f = vec![0.0; 8];
        assert!(matches!(
            lat.apply_delta_n(1, 3, &f),
            Err(Error::Range { requested: 4, depth: 3 })
        ));
    }

    #[test]
    fn averages_agree_with_direct_sums() {
        let lat = Lattice::with_fractions(5, &[0.1, 0.9]).unwrap();
        let f: Vec<f64> = (0..lat.num_leaves()).map(|k| (k as f64).sin()).collect();
        let avg = lat.cell_averages(&f);
        for id in 0..lat.num_cells() {
            assert!((avg[id] - lat.average(&f, id)).abs() < 1e-13);
        }
    }
}
