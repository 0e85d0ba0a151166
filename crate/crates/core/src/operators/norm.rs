use nalgebra::{DMatrix, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::Lattice;
use crate::sampling::random_leaf_vector;

use super::LeafOperator;

/// Largest leaf count for which the norm is computed by a dense SVD.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    DenseSvd,
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    /// `‖Gx − λx‖/λ` at the returned vector; zero for the dense path.
    pub residual: f64,
    pub iterations: usize,
}

/// `‖M_{v^{1/2}} T M_{w^{1/2}}‖` on `L²(μ)`.
pub fn two_weight_norm<T: LeafOperator + ?Sized>(lattice: &Lattice, op: &T, v: &[f64], w: &[f64]) -> NormEstimate {
    if lattice.num_leaves() <= DENSE_LIMIT {
        two_weight_norm_dense(lattice, op, v, w)
    } else {
        two_weight_norm_power(lattice, op, v, w, 1e-6, 20_000)
    }
}

/// The composed operator in an orthonormal leaf basis:
/// `D^{1/2} V M W D^{−1/2}` with `D = diag(μ)`.
pub fn composed_matrix<T: LeafOperator + ?Sized>(lattice: &Lattice, op: &T, v: &[f64], w: &[f64]) -> DMatrix<f64> {
    let mu = lattice.leaf_masses();
    let mut m = op.assemble(lattice);
    let n = mu.len();
    for x in 0..n {
        let left = (mu[x] * v[x]).sqrt();
        for y in 0..n {
            m[(x, y)] *= left * (w[y] / mu[y]).sqrt();
        }
    }
    m
}

pub fn two_weight_norm_dense<T: LeafOperator + ?Sized>(lattice: &Lattice, op: &T, v: &[f64], w: &[f64]) -> NormEstimate {
    let m = composed_matrix(lattice, op, v, w);
    let value = largest_singular_value(m);
    NormEstimate {
        value,
        method: NormMethod::DenseSvd,
        residual: 0.0,
        iterations: 0,
    }
}

/// Exactly-zero rows and columns (leaves where a weight vanishes) are
/// removed first: they do not change the singular values, and nalgebra's
/// bidiagonal QR iteration can return NaN or stall on them. The Gram
/// eigenvalues remain as a fallback.
fn largest_singular_value(m: DMatrix<f64>) -> f64 {
    let rows: Vec<usize> = (0..m.nrows()).filter(|&i| m.row(i).iter().any(|&x| x != 0.0)).collect();
    let cols: Vec<usize> = (0..m.ncols()).filter(|&j| m.column(j).iter().any(|&x| x != 0.0)).collect();
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let m = m.select_rows(&rows).select_columns(&cols);
    let gram = if m.nrows() < m.ncols() {
        &m * m.transpose()
    } else {
        m.transpose() * &m
    };
    let max_iter = 50 * m.nrows().max(m.ncols()).max(10);
    match SVD::try_new_unordered(m, false, false, f64::EPSILON, max_iter) {
        Some(svd) if svd.singular_values.iter().all(|x| x.is_finite()) => svd.singular_values.max(),
        _ => gram.symmetric_eigenvalues().max().max(0.0).sqrt(),
    }
}

/// Power iteration on the Gram operator `B*B`, `B = D^{1/2} V T W D^{−1/2}`,
/// applied matrix-free. Stops once the Rayleigh quotient settles to
/// `rel_tol²` and the eigen-residual is below `rel_tol`.
pub fn two_weight_norm_power<T: LeafOperator + ?Sized>(
    lattice: &Lattice,
    op: &T,
    v: &[f64],
    w: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> NormEstimate {
    let mu = lattice.leaf_masses();
    let sv: Vec<f64> = v.iter().map(|x| x.sqrt()).collect();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let smu: Vec<f64> = mu.iter().map(|x| x.sqrt()).collect();
    // B x = D^{1/2} V T W D^{−1/2} x;  Bᵀ y = D^{1/2} W T* V D^{−1/2} y.
    let b = |x: &[f64]| -> Vec<f64> {
        let inner: Vec<f64> = (0..x.len()).map(|k| sw[k] * x[k] / smu[k]).collect();
        let t = op.apply(lattice, &inner);
        (0..x.len()).map(|k| smu[k] * sv[k] * t[k]).collect()
    };
    let bt = |y: &[f64]| -> Vec<f64> {
        let inner: Vec<f64> = (0..y.len()).map(|k| sv[k] * y[k] / smu[k]).collect();
        let t = op.apply_adjoint(lattice, &inner);
        (0..y.len()).map(|k| smu[k] * sw[k] * t[k]).collect()
    };
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut x = random_leaf_vector(&mut ChaCha8Rng::seed_from_u64(0x5eed), mu.len());
    let nx = norm(&x);
    x.iter_mut().for_each(|a| *a /= nx);
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        let g = bt(&b(&x));
        let new_lambda: f64 = x.iter().zip(&g).map(|(a, b)| a * b).sum();
        let ng = norm(&g);
        if ng == 0.0 {
            lambda = 0.0;
            residual = 0.0;
            break;
        }
        residual = g
            .iter()
            .zip(&x)
            .map(|(gi, xi)| (gi - new_lambda * xi).powi(2))
            .sum::<f64>()
            .sqrt()
            / new_lambda.abs().max(f64::MIN_POSITIVE);
        let settled = (new_lambda - lambda).abs() <= rel_tol * rel_tol * new_lambda.abs();
        lambda = new_lambda;
        x = g.into_iter().map(|a| a / ng).collect();
        if settled && residual <= rel_tol {
            break;
        }
    }
    NormEstimate {
        value: lambda.max(0.0).sqrt(),
        method: NormMethod::PowerIteration,
        residual,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{HaarShift, Paraproduct};
    use crate::sampling::trial_rng;

    #[test]
    fn dense_and_power_agree() {
        let lat = Lattice::with_fractions(5, &[0.35, 0.65]).unwrap();
        let mut rng = trial_rng(8, 0);
        let s = HaarShift::random(&mut rng, &lat, 1).unwrap();
        let v: Vec<f64> = (0..32).map(|k| 0.5 + (k as f64 * 0.37).sin().abs()).collect();
        let w: Vec<f64> = (0..32).map(|k| 0.2 + ((k * 7) % 5) as f64).collect();
        let d = two_weight_norm_dense(&lat, &s, &v, &w);
        let p = two_weight_norm_power(&lat, &s, &v, &w, 1e-8, 100_000);
        assert!((d.value - p.value).abs() < 1e-6 * d.value, "{d:?} {p:?}");
        let para = Paraproduct::random(&mut rng, &lat, 0.8).unwrap();
        let d = two_weight_norm_dense(&lat, &para, &v, &w);
        let p = two_weight_norm_power(&lat, &para, &v, &w, 1e-8, 100_000);
        assert!((d.value - p.value).abs() < 1e-6 * d.value, "{d:?} {p:?}");
    }

    #[test]
    fn zero_and_scaling() {
        let lat = Lattice::uniform(4, 2).unwrap();
        let z = HaarShift::zero(&lat, 1).unwrap();
        let ones = vec![1.0; 16];
        assert_eq!(two_weight_norm(&lat, &z, &ones, &ones).value, 0.0);
        let s = HaarShift::random(&mut trial_rng(9, 0), &lat, 2).unwrap();
        let v: Vec<f64> = (0..16).map(|k| 1.0 + k as f64).collect();
        let w: Vec<f64> = (0..16).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let a = two_weight_norm(&lat, &s, &v, &w).value;
        let vs: Vec<f64> = v.iter().map(|x| x * 3.0).collect();
        let ws: Vec<f64> = w.iter().map(|x| x / 3.0).collect();
        let b = two_weight_norm(&lat, &s, &vs, &ws).value;
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn transpose_swaps_weights() {
        let lat = Lattice::with_fractions(4, &[0.2, 0.3, 0.5]).unwrap();
        let s = HaarShift::random(&mut trial_rng(10, 0), &lat, 1).unwrap();
        let v: Vec<f64> = (0..lat.num_leaves()).map(|k| 1.0 + (k % 4) as f64).collect();
        let w: Vec<f64> = (0..lat.num_leaves()).map(|k| 0.5 + (k % 3) as f64).collect();
        let a = two_weight_norm(&lat, &s, &v, &w).value;
        let b = two_weight_norm(&lat, &s.transpose(), &w, &v).value;
        assert!((a - b).abs() < 1e-10 * a);
    }

    #[test]
    fn sparse_weights_do_not_break_svd() {
        // Zero leaves in both weights; the unstripped SVD returns NaN here.
        let lat = Lattice::uniform(8, 2).unwrap();
        let g = crate::gauge::BumpGauge::log(2.0).unwrap();
        let mut rng = trial_rng(0, 54);
        let mut v = crate::sampling::random_weight(&mut rng, &lat).into_inner();
        let w = crate::sampling::random_weight(&mut rng, &lat).into_inner();
        crate::dyadic::normalize_bump(&lat, &mut v, &w, &g, &g);
        let s = HaarShift::random(&mut rng, &lat, 1).unwrap();
        let dense = two_weight_norm_dense(&lat, &s, &v, &w).value;
        let power = two_weight_norm_power(&lat, &s, &v, &w, 1e-9, 50_000).value;
        assert!(dense.is_finite());
        assert!((dense - power).abs() < 1e-6 * dense, "{dense} vs {power}");
    }

    #[test]
    fn zero_rows_do_not_hide_the_norm() {
        let lat = Lattice::uniform(8, 2).unwrap();
        let g = crate::gauge::BumpGauge::log(2.0).unwrap();
        let mut rng = trial_rng(0, 33);
        let mut v = crate::sampling::random_weight(&mut rng, &lat).into_inner();
        let w = crate::sampling::random_weight(&mut rng, &lat).into_inner();
        crate::dyadic::normalize_bump(&lat, &mut v, &w, &g, &g);
        let s = HaarShift::random(&mut rng, &lat, 2).unwrap();
        for part in crate::operators::decompose_complexity(&lat, &s).unwrap() {
            let dense = two_weight_norm_dense(&part.lattice, &part.shift, &v, &w).value;
            let power = two_weight_norm_power(&part.lattice, &part.shift, &v, &w, 1e-10, 50_000).value;
            assert!(power > 0.05);
            assert!((dense - power).abs() < 1e-6 * power, "{dense} vs {power}");
        }
    }
}
