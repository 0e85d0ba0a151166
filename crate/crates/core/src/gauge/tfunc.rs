use super::bump::BumpGauge;
use crate::error::{Error, Result};

/// Value, gradient and Hessian of `T(A, N) = N·m′(N/A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TValue {
    pub value: f64,
    pub d_a: f64,
    pub d_n: f64,
    pub d_aa: f64,
    pub d_an: f64,
    pub d_nn: f64,
}

impl TValue {
    pub fn hessian_det(&self) -> f64 {
        self.d_aa * self.d_nn - self.d_an * self.d_an
    }
}

/// Evaluates `T(A, N) = N ∫₀^{N/A} ds/φ(s)` for `A ∈ [1, 2]`, `N ∈ [0, 1]`.
pub fn t_scalar(gauge: &BumpGauge, a: f64, n: f64) -> Result<TValue> {
    if !(1.0..=2.0).contains(&a) {
        return Err(Error::Domain {
            value: a,
            reason: "A must lie in [1, 2]".into(),
        });
    }
    if !(0.0..=1.0).contains(&n) {
        return Err(Error::Domain {
            value: n,
            reason: "N must lie in [0, 1]".into(),
        });
    }
    Ok(t_unchecked(gauge, a, n))
}

/// [`t_scalar`] without range checks; callers guarantee `0 ≤ N/A ≤ 1`.
pub(crate) fn t_unchecked(gauge: &BumpGauge, a: f64, n: f64) -> TValue {
    if n == 0.0 {
        return TValue {
            value: 0.0,
            d_a: 0.0,
            d_n: 0.0,
            d_aa: 0.0,
            d_an: 0.0,
            d_nn: 0.0,
        };
    }
    let s = n / a;
    let phi = gauge.phi(s);
    let dphi = gauge.phi_prime(s);
    let g = 1.0 / phi;
    let dg = -dphi / (phi * phi);
    TValue {
        value: n * gauge.m_prime(s),
        d_a: -n * n * g / (a * a),
        d_n: gauge.m_prime(s) + s * g,
        d_aa: n * n * (2.0 * a * phi - n * dphi) / (a * a * phi).powi(2),
        d_an: -2.0 * n * g / (a * a) - n * n * dg / (a * a * a),
        d_nn: (2.0 * g + s * dg) / a,
    }
}
