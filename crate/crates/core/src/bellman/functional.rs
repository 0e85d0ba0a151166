use serde::{Deserialize, Serialize};

use crate::dyadic::{DistFn, StepFn};
use crate::error::{Error, Result};
use crate::gauge::{t_unchecked, BumpGauge};
use crate::numeric::integrate;

/// Step used by every central-difference cross-check.
pub const FD_STEP: f64 = 1e-4;

/// `B(f, u) = f²/u`, with `B(0, 0) = 0`.
pub fn b_value(f: f64, u: f64) -> f64 {
    if u > 0.0 {
        f * f / u
    } else if f == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `u(N) = ∫ (2N − m(N))`.
pub fn u_of_n(n: &DistFn, gauge: &BumpGauge) -> f64 {
    u_of_step(n.as_step(), gauge)
}

pub(crate) fn u_of_step(n: &StepFn, gauge: &BumpGauge) -> f64 {
    n.integrate_with(|v| 2.0 * v - gauge.m(v))
}

/// `B̃(f, N) = B(f, u(N))`.
pub fn b_tilde(f: f64, n: &DistFn, gauge: &BumpGauge) -> f64 {
    b_value(f, u_of_n(n, gauge))
}

/// The quadratic form of the Hessian of `B` at `(f, u)` applied to `(df, du)`.
pub fn b_hessian_form(f: f64, u: f64, df: f64, du: f64) -> f64 {
    2.0 * df * df / u - 4.0 * f * df * du / (u * u) + 2.0 * f * f * du * du / (u * u * u)
}

/// Directional derivatives of `u` at `N` along `ΔN`, with their
/// finite-difference counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivReport {
    pub u_prime: f64,
    pub u_second: f64,
    pub w_delta: f64,
    /// `u′/w_Δ`; zero when `w_Δ = 0`.
    pub kappa: f64,
    pub fd_u_prime: f64,
    pub fd_u_second: f64,
    pub n_psi: f64,
}

impl DerivReport {
    /// Slack of `−u″ ≥ w_Δ²/n_Ψ(N)`.
    pub fn convexity_slack(&self) -> f64 {
        if self.n_psi > 0.0 {
            -self.u_second - self.w_delta * self.w_delta / self.n_psi
        } else {
            0.0
        }
    }
}

/// Checks that `N ± ΔN` are distribution functions up to `tol`.
pub fn check_perturbation(n: &DistFn, dn: &StepFn, tol: f64) -> Result<()> {
    for sign in [1.0, -1.0] {
        let moved = StepFn::linear_combination(&[(1.0, n.as_step()), (sign, dn)]);
        DistFn::from_step_lenient(&moved, tol)
            .map_err(|e| Error::invalid(format!("N {} ΔN: {e}", if sign > 0.0 { "+" } else { "-" })))?;
    }
    Ok(())
}

pub fn directional_derivs(n: &DistFn, dn: &StepFn, gauge: &BumpGauge) -> Result<DerivReport> {
    check_perturbation(n, dn, 1e-12)?;
    let pieces = n.as_step().zip_pieces(dn);
    let mut u_prime = 0.0;
    let mut u_second = 0.0;
    let mut w_delta = 0.0;
    for &(len, v, d) in &pieces {
        if v <= 0.0 || d == 0.0 {
            continue;
        }
        u_prime += len * (2.0 - gauge.m_prime(v)) * d;
        u_second -= len * d * d / gauge.phi(v);
        w_delta += len * d.abs();
    }
    // Central differences at h and h/2, Richardson-combined so the O(h²)
    // truncation does not swamp a nearly vanishing u′.
    let central = |h: f64| {
        let (up, um) = (u_increment(&pieces, h, gauge), u_increment(&pieces, -h, gauge));
        ((up - um) / (2.0 * h), (up + um) / (h * h))
    };
    let (d1, d2) = central(FD_STEP);
    let (e1, e2) = central(0.5 * FD_STEP);
    Ok(DerivReport {
        u_prime,
        u_second,
        w_delta,
        kappa: if w_delta > 0.0 { u_prime / w_delta } else { 0.0 },
        fd_u_prime: (4.0 * e1 - d1) / 3.0,
        fd_u_second: (4.0 * e2 - d2) / 3.0,
        n_psi: n.n_psi(gauge),
    })
}

/// `u(N + τΔN) − u(N)` summed piece by piece, with each `m` increment
/// integrated from `m′` so that no O(1) terms cancel.
fn u_increment(pieces: &[(f64, f64, f64)], tau: f64, gauge: &BumpGauge) -> f64 {
    pieces
        .iter()
        .filter(|p| p.2 != 0.0)
        .map(|&(len, v, d)| {
            let step = tau * d;
            let dm = integrate(|r| gauge.m_prime(r), v, v + step, 1e-15 * step.abs()).value;
            len * (2.0 * step - dm)
        })
        .sum()
}

/// `B̃″` along `(Δf, ΔN)`: analytic value, a second difference, and the
/// lower bound `c(Δf)²/n_Ψ(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondDerivative {
    pub analytic: f64,
    pub fd: f64,
    pub lower: f64,
}

pub fn b_tilde_second(f: f64, n: &DistFn, df: f64, dn: &StepFn, gauge: &BumpGauge) -> Result<SecondDerivative> {
    let d = directional_derivs(n, dn, gauge)?;
    let u = u_of_n(n, gauge);
    let analytic = b_hessian_form(f, u, df, d.u_prime) - f * f / (u * u) * d.u_second;
    let along = |tau: f64| {
        let moved = StepFn::linear_combination(&[(1.0, n.as_step()), (tau, dn)]);
        b_value(f + tau * df, u_of_step(&moved, gauge))
    };
    let h = FD_STEP;
    let fd = (along(h) - 2.0 * along(0.0) + along(-h)) / (h * h);
    let lower = if d.n_psi > 0.0 { gauge.c() * df * df / d.n_psi } else { 0.0 };
    Ok(SecondDerivative { analytic, fd, lower })
}

fn check_m(m: f64) -> Result<()> {
    if (0.0..=1.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::invalid(format!("M = {m} outside [0, 1]")))
    }
}

/// `𝐓(A, N) = ∫ T(A, N(t)) dt`, with `∂𝐓/∂A`.
fn t_integral(a: f64, n: &StepFn, gauge: &BumpGauge) -> (f64, f64) {
    n.pieces().fold((0.0, 0.0), |(t, ta), (len, v)| {
        let tv = t_unchecked(gauge, a, v);
        (t + len * tv.value, ta + len * tv.d_a)
    })
}

/// `u(M, N) = 2∫N − 𝐓(M + 1, N)`.
pub fn u_of_mn(m: f64, n: &DistFn, gauge: &BumpGauge) -> Result<f64> {
    check_m(m)?;
    Ok(2.0 * n.mean() - t_integral(m + 1.0, n.as_step(), gauge).0)
}

/// `B̃(f, N, M) = B(f, u(M, N))`.
pub fn b_tilde_mn(f: f64, n: &DistFn, m: f64, gauge: &BumpGauge) -> Result<f64> {
    Ok(b_value(f, u_of_mn(m, n, gauge)?))
}

/// `−∂B̃/∂M` by the analytic formula and by finite differences, with the
/// lower bound `f²/(16 n_Ψ(N))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbDmCheck {
    pub analytic: f64,
    pub fd: f64,
    pub lower: f64,
    pub slack: f64,
    /// The zero-weight convention applied: `N ≡ 0`.
    pub skipped: bool,
}

pub fn check_db_dm(f: f64, n: &DistFn, m: f64, gauge: &BumpGauge) -> Result<DbDmCheck> {
    check_m(m)?;
    if n.is_zero() {
        return Ok(DbDmCheck {
            analytic: 0.0,
            fd: 0.0,
            lower: 0.0,
            slack: 0.0,
            skipped: true,
        });
    }
    let u = u_of_mn(m, n, gauge)?;
    let (_, t_a) = t_integral(m + 1.0, n.as_step(), gauge);
    let analytic = f * f / (u * u) * (-t_a);
    let b = |mm: f64| b_value(f, u_of_mn(mm, n, gauge).expect("M in range"));
    let h = FD_STEP;
    // Central where possible, second-order one-sided at the ends of [0, 1].
    let db = if m - h >= 0.0 && m + h <= 1.0 {
        (b(m + h) - b(m - h)) / (2.0 * h)
    } else if m - h < 0.0 {
        (-3.0 * b(m) + 4.0 * b(m + h) - b(m + 2.0 * h)) / (2.0 * h)
    } else {
        (3.0 * b(m) - 4.0 * b(m - h) + b(m - 2.0 * h)) / (2.0 * h)
    };
    let lower = f * f / (16.0 * n.n_psi(gauge));
    Ok(DbDmCheck {
        analytic,
        fd: -db,
        lower,
        slack: analytic - lower,
        skipped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator(len: f64, v: f64) -> DistFn {
        DistFn::new(vec![0.0, len], vec![v]).unwrap()
    }

    #[test]
    fn u_of_unit_weight() {
        let g = BumpGauge::log(2.0).unwrap();
        let m1 = integrate(|r| g.m_prime(r), 0.0, 1.0, 1e-13).value;
        let u = u_of_n(&indicator(1.0, 1.0), &g);
        assert!((u - (2.0 - m1)).abs() < 1e-10);
        assert_eq!(u_of_n(&DistFn::zero(), &g), 0.0);
    }

    #[test]
    fn zero_direction() {
        let g = BumpGauge::log(2.0).unwrap();
        let d = directional_derivs(&indicator(2.0, 0.6), &StepFn::zero(), &g).unwrap();
        assert_eq!((d.u_prime, d.u_second, d.w_delta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn invalid_direction_rejected() {
        let g = BumpGauge::log(2.0).unwrap();
        let dn = StepFn::new(vec![0.0, 1.0], vec![0.5]).unwrap();
        assert!(directional_derivs(&indicator(1.0, 0.8), &dn, &g).is_err());
    }

    #[test]
    fn derivative_matches_differences() {
        let g = BumpGauge::log(2.0).unwrap();
        let n = DistFn::new(vec![0.0, 0.5, 1.5, 2.0], vec![0.9, 0.4, 0.1]).unwrap();
        let dn = StepFn::new(vec![0.0, 0.5, 1.5, 2.0], vec![-0.05, 0.2, -0.08]).unwrap();
        let d = directional_derivs(&n, &dn, &g).unwrap();
        assert!((d.u_prime - d.fd_u_prime).abs() < 1e-8 * d.u_prime.abs());
        assert!((d.u_second - d.fd_u_second).abs() < 1e-6 * d.u_second.abs());
        assert!(d.kappa.abs() <= 2.0);
        assert!(d.convexity_slack() >= 0.0);
    }

    #[test]
    fn db_dm_at_edges() {
        let g = BumpGauge::log(2.0).unwrap();
        let n = DistFn::new(vec![0.0, 0.7, 3.0], vec![1.0, 0.3]).unwrap();
        for m in [0.0, 0.3, 1.0] {
            let c = check_db_dm(1.3, &n, m, &g).unwrap();
            assert!((c.analytic - c.fd).abs() < 1e-6 * c.analytic, "{c:?}");
            assert!(c.slack >= 0.0);
        }
        assert!(check_db_dm(1.0, &n, 1.5, &g).is_err());
        assert!(check_db_dm(1.0, &DistFn::zero(), 0.5, &g).unwrap().skipped);
    }

    #[test]
    fn u_mn_sandwich() {
        let g = BumpGauge::log(3.0).unwrap();
        let n = DistFn::new(vec![0.0, 0.2, 5.0], vec![0.8, 0.01]).unwrap();
        for m in [0.0, 0.5, 1.0] {
            let u = u_of_mn(m, &n, &g).unwrap();
            assert!(u >= n.mean() && u <= 2.0 * n.mean());
        }
    }
}
