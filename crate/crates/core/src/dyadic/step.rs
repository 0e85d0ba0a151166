use crate::error::{Error, Result};
use crate::gauge::BumpGauge;

use super::lattice::{CellId, Lattice};

/// Right-continuous step function on `[0, ∞)` with compact support:
/// value `values[j]` on `[knots[j], knots[j+1])` and 0 beyond the last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StepFn {
    pub fn zero() -> Self {
        Self {
            knots: vec![0.0],
            values: Vec::new(),
        }
    }

    /// `knots` must start at 0 and increase strictly; one value per piece.
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.first() != Some(&0.0) {
            return Err(Error::invalid("step function knots must start at 0"));
        }
        if knots.len() != values.len() + 1 {
            return Err(Error::invalid("need exactly one value per knot interval"));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::invalid("knots must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite step value"));
        }
        Ok(Self { knots, values }.canonical())
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(length, value)` for each piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[1] - w[0], v))
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self.knots.partition_point(|&k| k <= t) {
            0 => 0.0,
            j if j > self.values.len() => 0.0,
            j => self.values[j - 1],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ length·g(value)` over the pieces.
    pub fn integrate_with<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.pieces().map(|(len, v)| len * g(v)).sum()
    }

    pub fn integral(&self) -> f64 {
        self.integrate_with(|v| v)
    }

    /// `Σ c_k f_k` on the union of the breakpoints.
    pub fn linear_combination(terms: &[(f64, &StepFn)]) -> StepFn {
        let mut knots: Vec<f64> = terms.iter().flat_map(|(_, f)| f.knots.iter().copied()).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        if knots.is_empty() {
            return Self::zero();
        }
        let mut cursors = vec![0usize; terms.len()];
        let mut values = Vec::with_capacity(knots.len() - 1);
        for &t in &knots[..knots.len() - 1] {
            let mut acc = 0.0;
            for ((c, f), cur) in terms.iter().zip(cursors.iter_mut()) {
                while *cur < f.knots.len() && f.knots[*cur] <= t {
                    *cur += 1;
                }
                if *cur > 0 && *cur <= f.values.len() {
                    acc += c * f.values[*cur - 1];
                }
            }
            values.push(acc);
        }
        Self { knots, values }.canonical()
    }

    /// `(length, self, other)` on the common refinement of both partitions.
    pub fn zip_pieces(&self, other: &StepFn) -> Vec<(f64, f64, f64)> {
        let mut knots: Vec<f64> = self.knots.iter().chain(&other.knots).copied().collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        knots
            .windows(2)
            .map(|w| (w[1] - w[0], self.eval(w[0]), other.eval(w[0])))
            .collect()
    }

    pub fn scale(&self, c: f64) -> StepFn {
        Self::linear_combination(&[(c, self)])
    }

    /// Merges equal neighbours and trims trailing zero pieces.
    fn canonical(mut self) -> Self {
        let mut knots = vec![0.0];
        let mut values: Vec<f64> = Vec::with_capacity(self.values.len());
        for j in 0..self.values.len() {
            let v = self.values[j];
            if values.last() == Some(&v) {
                *knots.last_mut().unwrap() = self.knots[j + 1];
            } else {
                values.push(v);
                knots.push(self.knots[j + 1]);
            }
        }
        while values.last() == Some(&0.0) {
            values.pop();
            knots.pop();
        }
        self.knots = knots;
        self.values = values;
        self
    }

    /// Largest pointwise difference, evaluated on the union of breakpoints.
    pub fn max_abs_diff(&self, other: &StepFn) -> f64 {
        let d = Self::linear_combination(&[(1.0, self), (-1.0, other)]);
        d.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Normalised distribution function: a step function with values in
/// `[0, 1]` that strictly decrease from piece to piece.
#[derive(Debug, Clone, PartialEq)]
pub struct DistFn(StepFn);

impl DistFn {
    pub fn zero() -> Self {
        Self(StepFn::zero())
    }

    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::try_from(StepFn::new(knots, values)?)
    }

    /// `N(t) = mass{x ∈ I : w(x) > t}/mass(I)`.
    pub fn of_weight(lattice: &Lattice, w: &[f64], cell: CellId) -> Self {
        let c = lattice.cell(cell);
        let leaf0 = lattice.leaf_cell(0);
        let mut pairs: Vec<(f64, f64)> = c
            .leaves
            .clone()
            .map(|k| (w[k], lattice.mass(leaf0 + k)))
            .filter(|p| p.0 > 0.0)
            .collect();
        Self::from_pairs(&mut pairs, c.mass)
    }

    /// Distribution of `(value, mass)` pairs normalised by `total`.
    pub fn from_pairs(pairs: &mut [(f64, f64)], total: f64) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut knots = vec![0.0];
        let mut values = Vec::new();
        // Walk distinct values from the top, accumulating the superlevel mass.
        let mut above = 0.0;
        let mut tops: Vec<(f64, f64)> = Vec::new();
        let mut j = pairs.len();
        while j > 0 {
            let v = pairs[j - 1].0;
            while j > 0 && pairs[j - 1].0 == v {
                above += pairs[j - 1].1;
                j -= 1;
            }
            if v > 0.0 {
                tops.push((v, above));
            }
        }
        for &(v, mass) in tops.iter().rev() {
            knots.push(v);
            values.push((mass / total).min(1.0));
        }
        Self(StepFn { knots, values }.canonical())
    }

    /// `Σ α_k N_k` for convex weights `α`; values are clamped into `[0, 1]`
    /// to absorb rounding.
    pub fn convex_combination(alphas: &[f64], parts: &[&DistFn]) -> Self {
        let terms: Vec<(f64, &StepFn)> = alphas.iter().copied().zip(parts.iter().map(|d| &d.0)).collect();
        let mut f = StepFn::linear_combination(&terms);
        for v in &mut f.values {
            *v = v.clamp(0.0, 1.0);
        }
        Self(f.canonical())
    }

    pub fn as_step(&self) -> &StepFn {
        &self.0
    }

    /// Accepts a step function whose values leave `[0, 1]` or fail to
    /// decrease by at most `tol`, clamping and flattening the violations.
    pub fn from_step_lenient(f: &StepFn, tol: f64) -> Result<Self> {
        let mut values = Vec::with_capacity(f.values.len());
        let mut prev = 1.0f64;
        for &v in &f.values {
            if v < -tol || v > 1.0 + tol || v > prev + tol {
                return Err(Error::invalid(format!(
                    "not a distribution function: value {v} after {prev}"
                )));
            }
            let v = v.clamp(0.0, prev);
            values.push(v);
            prev = v;
        }
        Ok(Self(
            StepFn {
                knots: f.knots.clone(),
                values,
            }
            .canonical(),
        ))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.eval(t)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `∫ N`, the average of the generating weight.
    pub fn mean(&self) -> f64 {
        self.0.integral()
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.0.pieces()
    }

    /// Distribution of `λw` given that of `w`.
    pub fn dilate(&self, lambda: f64) -> Self {
        if lambda <= 0.0 {
            return Self::zero();
        }
        let knots = self.0.knots.iter().map(|k| k * lambda).collect();
        Self(StepFn {
            knots,
            values: self.0.values.clone(),
        })
    }

    /// `n_Ψ(N) = ∫ N Ψ(N)`, zero for the zero distribution.
    pub fn n_psi(&self, gauge: &BumpGauge) -> f64 {
        self.0.integrate_with(|v| v * gauge.psi(v))
    }
}

impl TryFrom<StepFn> for DistFn {
    type Error = Error;

    fn try_from(f: StepFn) -> Result<Self> {
        let f = f.canonical();
        if f.values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::invalid("distribution values must lie in [0, 1]"));
        }
        if f.values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::invalid("distribution values must strictly decrease"));
        }
        Ok(Self(f))
    }
}

/// `n_Ψ(N)`.
pub fn n_psi(n: &DistFn, gauge: &BumpGauge) -> f64 {
    n.n_psi(gauge)
}

/// Distribution functions of `w` on every cell.
pub fn dist_fns(lattice: &Lattice, w: &[f64]) -> Vec<DistFn> {
    (0..lattice.num_cells())
        .map(|id| DistFn::of_weight(lattice, w, id))
        .collect()
}
