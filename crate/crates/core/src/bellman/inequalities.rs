use serde::{Deserialize, Serialize};

use crate::dyadic::DistFn;
use crate::error::{Error, Result};
use crate::gauge::BumpGauge;

use super::functional::{b_tilde, b_tilde_mn, b_value, u_of_n};

/// A point `(f, N, M)`; `m` is only read by `B̃(f, N, M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellmanPoint {
    pub f: f64,
    pub n: DistFn,
    pub m: Option<f64>,
}

impl BellmanPoint {
    pub fn new(f: f64, n: DistFn) -> Self {
        Self { f, n, m: None }
    }

    pub fn with_m(f: f64, n: DistFn, m: f64) -> Self {
        Self { f, n, m: Some(m) }
    }
}

/// One side-by-side evaluation of an inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl Slack {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            slack: lhs - rhs,
        }
    }

    /// `slack ≥ −tol·(1 + |rhs|)`.
    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol * (1.0 + self.rhs.abs())
    }

    /// Slack divided by `1 + |rhs|`.
    pub fn relative(&self) -> f64 {
        self.slack / (1.0 + self.rhs.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointCheck {
    pub slack: Slack,
    pub b1: f64,
    pub b2: f64,
    pub b_mid: f64,
    pub n_mid: f64,
}

/// Midpoint convexity gain: `½(B̃₁ + B̃₂) − B̃(mid) ≥ (c/4)(f₁ − f)²/n_Ψ(N)`.
pub fn check_two_point(f1: f64, n1: &DistFn, f2: f64, n2: &DistFn, gauge: &BumpGauge) -> TwoPointCheck {
    let f = 0.5 * (f1 + f2);
    let n = DistFn::convex_combination(&[0.5, 0.5], &[n1, n2]);
    let b1 = b_value(f1, u_of_n(n1, gauge));
    let b2 = b_value(f2, u_of_n(n2, gauge));
    let b_mid = b_value(f, u_of_n(&n, gauge));
    let n_mid = n.n_psi(gauge);
    if n_mid == 0.0 {
        return TwoPointCheck {
            slack: Slack::new(0.0, 0.0),
            b1,
            b2,
            b_mid,
            n_mid,
        };
    }
    let lhs = 0.5 * (b1 + b2) - b_mid;
    let rhs = gauge.c() / 4.0 * (f1 - f).powi(2) / n_mid;
    TwoPointCheck {
        slack: Slack::new(lhs, rhs),
        b1,
        b2,
        b_mid,
        n_mid,
    }
}

fn check_alphas(alphas: &[f64], len: usize) -> Result<()> {
    if alphas.len() != len || len == 0 {
        return Err(Error::invalid("need one weight per point"));
    }
    if alphas.iter().any(|&a| !(a >= 0.0)) {
        return Err(Error::invalid("convex weights must be nonnegative"));
    }
    let total: f64 = alphas.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("convex weights sum to {total}, not 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPointCheck {
    pub slack: Slack,
    pub f: f64,
    pub n_psi: f64,
    /// `Σ α_k |f_k − f|`.
    pub spread: f64,
}

/// `−B̃(f, N) + Σ α_k B̃(f_k, N_k) ≥ (c/16)(Σ α_k|f_k − f|)²/n_Ψ(N)`.
pub fn check_multi_point(alphas: &[f64], points: &[BellmanPoint], gauge: &BumpGauge) -> Result<MultiPointCheck> {
    check_alphas(alphas, points.len())?;
    let f: f64 = alphas.iter().zip(points).map(|(a, p)| a * p.f).sum();
    let parts: Vec<&DistFn> = points.iter().map(|p| &p.n).collect();
    let n = DistFn::convex_combination(alphas, &parts);
    let n_psi = n.n_psi(gauge);
    let spread: f64 = alphas.iter().zip(points).map(|(a, p)| a * (p.f - f).abs()).sum();
    if n_psi == 0.0 {
        return Ok(MultiPointCheck {
            slack: Slack::new(0.0, 0.0),
            f,
            n_psi,
            spread,
        });
    }
    let avg: f64 = alphas
        .iter()
        .zip(points)
        .map(|(a, p)| if *a > 0.0 { a * b_tilde(p.f, &p.n, gauge) } else { 0.0 })
        .sum();
    let lhs = avg - b_tilde(f, &n, gauge);
    let rhs = gauge.c() / 16.0 * spread * spread / n_psi;
    Ok(MultiPointCheck {
        slack: Slack::new(lhs, rhs),
        f,
        n_psi,
        spread,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropCheck {
    pub slack: Slack,
    pub f: f64,
    pub m: f64,
    pub n_psi: f64,
}

/// `−B̃(X) + Σ α_k B̃(X_k) ≥ a f²/(16 n_Ψ(N))` with `M = a + Σ α_k M_k`.
pub fn check_drop(alphas: &[f64], a: f64, points: &[BellmanPoint], gauge: &BumpGauge) -> Result<DropCheck> {
    check_alphas(alphas, points.len())?;
    if !(a >= 0.0) {
        return Err(Error::invalid(format!("a = {a} must be nonnegative")));
    }
    let ms: Vec<f64> = points
        .iter()
        .map(|p| p.m.ok_or_else(|| Error::invalid("point without M")))
        .collect::<Result<_>>()?;
    let m = a + alphas.iter().zip(&ms).map(|(al, mk)| al * mk).sum::<f64>();
    if m > 1.0 + 1e-12 {
        return Err(Error::invalid(format!("M = a + Σα_k M_k = {m} exceeds 1")));
    }
    let m = m.min(1.0);
    let f: f64 = alphas.iter().zip(points).map(|(al, p)| al * p.f).sum();
    let parts: Vec<&DistFn> = points.iter().map(|p| &p.n).collect();
    let n = DistFn::convex_combination(alphas, &parts);
    let n_psi = n.n_psi(gauge);
    if n_psi == 0.0 {
        return Ok(DropCheck {
            slack: Slack::new(0.0, 0.0),
            f,
            m,
            n_psi,
        });
    }
    let mut avg = 0.0;
    for ((al, p), mk) in alphas.iter().zip(points).zip(&ms) {
        if *al > 0.0 {
            avg += al * b_tilde_mn(p.f, &p.n, *mk, gauge)?;
        }
    }
    let lhs = avg - b_tilde_mn(f, &n, m, gauge)?;
    let rhs = a * f * f / (16.0 * n_psi);
    Ok(DropCheck {
        slack: Slack::new(lhs, rhs),
        f,
        m,
        n_psi,
    })
}
