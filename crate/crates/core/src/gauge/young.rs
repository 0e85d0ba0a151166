use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{self, integrate};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// Φ(t) = t·(ln(e + t))^α.
    LogPower { alpha: f64 },
    Custom {
        eval: ScalarFn,
        deriv: ScalarFn,
        second: Option<ScalarFn>,
    },
}

/// A Young function Φ: convex, increasing, Φ(0) = 0.
#[derive(Clone)]
pub struct YoungFunction {
    kind: Kind,
}

impl fmt::Debug for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::LogPower { alpha } => write!(f, "YoungFunction::LogPower(alpha = {alpha})"),
            Kind::Custom { .. } => write!(f, "YoungFunction::Custom"),
        }
    }
}

impl YoungFunction {
    /// `Φ(t) = t·(ln(e + t))^α`, tail-integrable exactly when `α > 1`.
    pub fn log_power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::param("alpha", format!("need alpha > 1, got {alpha}")));
        }
        Ok(Self {
            kind: Kind::LogPower { alpha },
        })
    }

    /// A user-supplied Young function. Without `second`, Φ″ falls back to a
    /// central difference of `deriv`.
    pub fn custom<F, D>(eval: F, deriv: D, second: Option<ScalarFn>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: Kind::Custom {
                eval: Arc::new(eval),
                deriv: Arc::new(deriv),
                second,
            },
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            Kind::LogPower { alpha } => Some(alpha),
            Kind::Custom { .. } => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::LogPower { alpha } => {
                if t <= 0.0 {
                    return 0.0;
                }
                t * (std::f64::consts::E + t).ln().powf(*alpha)
            }
            Kind::Custom { eval, .. } => eval(t),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::LogPower { alpha } => {
                let t = t.max(0.0);
                let et = std::f64::consts::E + t;
                let l = et.ln();
                l.powf(*alpha) + alpha * t * l.powf(alpha - 1.0) / et
            }
            Kind::Custom { deriv, .. } => deriv(t),
        }
    }

    pub fn second_deriv(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::LogPower { alpha } => {
                let t = t.max(0.0);
                let e = std::f64::consts::E;
                let et = e + t;
                let l = et.ln();
                alpha * l.powf(alpha - 1.0) / et
                    + alpha * l.powf(alpha - 2.0) * (e * l + (alpha - 1.0) * t) / (et * et)
            }
            Kind::Custom { deriv, second, .. } => match second {
                Some(s) => s(t),
                None => {
                    let h = 1e-5 * t.abs().max(1.0);
                    (deriv(t + h) - deriv((t - h).max(0.0))) / (t + h - (t - h).max(0.0))
                }
            },
        }
    }

    /// `ln Φ(t) + ln Φ′(t)`, i.e. `ln(1/s)` in the parametrisation `s = 1/(ΦΦ′)`.
    pub(crate) fn log_phi_dphi(&self, t: f64) -> f64 {
        self.log_phi_dphi_at(t.ln())
    }

    /// `ln Φ(eʸ) + ln Φ′(eʸ)`, overflow-free in `y` for the log-power family.
    pub(crate) fn log_phi_dphi_at(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::LogPower { alpha } => {
                let l = log_e_plus_exp(y);
                y + alpha * l.ln() + self.deriv_at(y).ln()
            }
            Kind::Custom { .. } => {
                let t = y.exp();
                self.eval(t).ln() + self.deriv(t).ln()
            }
        }
    }

    /// `ln Φ(eʸ)`.
    pub(crate) fn log_eval_at(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::LogPower { alpha } => y + alpha * log_e_plus_exp(y).ln(),
            Kind::Custom { .. } => self.eval(y.exp()).ln(),
        }
    }

    /// `Φ′(eʸ)`.
    pub(crate) fn deriv_at(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::LogPower { alpha } => {
                let l = log_e_plus_exp(y);
                // t/(e + t) = 1/(1 + e^{1-y})
                l.powf(*alpha) + alpha * l.powf(alpha - 1.0) / (1.0 + (1.0 - y).exp())
            }
            Kind::Custom { .. } => self.deriv(y.exp()),
        }
    }

    /// `∫_{eʸ}^∞ dt/Φ(t)`.
    pub(crate) fn tail_from(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::LogPower { alpha } => log_power_tail(*alpha, y),
            Kind::Custom { .. } => self.tail_integral(y.exp()),
        }
    }

    /// `∫_{t0}^∞ dt/Φ(t)`.
    pub fn tail_integral(&self, t0: f64) -> f64 {
        assert!(t0 > 0.0, "tail integral needs t0 > 0");
        match &self.kind {
            Kind::LogPower { alpha } => log_power_tail(*alpha, t0.ln()),
            Kind::Custom { .. } => {
                // With t = e^y the integrand is g(y) = e^y/Φ(e^y). Integrate up to
                // where e^y stays finite, then close with a power-law fit of g.
                let g = |y: f64| {
                    let t = y.exp();
                    t / self.eval(t)
                };
                let y0 = t0.ln();
                let y_max = 600.0f64.max(y0 + 10.0);
                let body = integrate(g, y0, y_max, 1e-13).value;
                let (g_end, g_mid) = (g(y_max), g(0.5 * y_max));
                let p = (g_mid / g_end).ln() / 2f64.ln();
                let remainder = if p > 1.0 { g_end * y_max / (p - 1.0) } else { f64::INFINITY };
                body + remainder
            }
        }
    }

    /// `Φ⁻¹(1)`.
    pub fn inverse_at_one(&self) -> f64 {
        let mut hi = 1.0;
        while self.eval(hi) < 1.0 {
            hi *= 2.0;
        }
        numeric::bisect(0.0, hi, |t| self.eval(t) < 1.0)
    }

    /// Normalised Luxemburg norm `inf{λ > 0 : avg Φ(value/λ) ≤ 1}` of a
    /// step function given as `(mass, value)` pairs.
    pub fn orlicz_norm(&self, pairs: &[(f64, f64)]) -> f64 {
        orlicz_norm(pairs, self)
    }

    /// Checks `Φ(0) = 0`, strict monotonicity and midpoint convexity on a
    /// geometric grid of `points` nodes over `[1e-6, 1e6]`.
    pub fn check_young(&self, points: usize) -> Result<()> {
        if self.eval(0.0).abs() > 1e-14 {
            return Err(Error::invalid(format!("Phi(0) = {} != 0", self.eval(0.0))));
        }
        let grid: Vec<f64> = (0..points)
            .map(|i| 1e-6 * 1e12f64.powf(i as f64 / (points - 1) as f64))
            .collect();
        let mut prev = 0.0;
        for &t in &grid {
            let v = self.eval(t);
            if v <= prev {
                return Err(Error::invalid(format!("Phi not increasing at t = {t}")));
            }
            prev = v;
        }
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = self.eval(0.5 * (a + b));
            let chord = 0.5 * (self.eval(a) + self.eval(b));
            if mid > chord * (1.0 + 1e-12) {
                return Err(Error::invalid(format!("Phi not convex on [{a}, {b}]")));
            }
        }
        Ok(())
    }
}

/// Normalised Luxemburg norm of `(mass, value)` pairs under `phi`.
///
/// By Jensen the norm lies in `[mean/Φ⁻¹(1), max/Φ⁻¹(1)]`; bisection runs
/// on that bracket.
pub fn orlicz_norm(pairs: &[(f64, f64)], phi: &YoungFunction) -> f64 {
    let total: f64 = pairs.iter().map(|p| p.0).sum();
    let max = pairs.iter().fold(0.0f64, |m, p| m.max(p.1));
    if max <= 0.0 || total <= 0.0 {
        return 0.0;
    }
    let mean = pairs.iter().map(|p| p.0 * p.1).sum::<f64>() / total;
    let inv = phi.inverse_at_one();
    let modular = |lambda: f64| pairs.iter().map(|&(m, v)| m * phi.eval(v / lambda)).sum::<f64>() / total;
    let (lo, hi) = (mean / inv, max / inv);
    if hi - lo <= 1e-15 * hi {
        return hi;
    }
    numeric::bisect(lo, hi, |lambda| modular(lambda) > 1.0)
}

/// `ln(e + eʸ)` without overflow.
fn log_e_plus_exp(y: f64) -> f64 {
    if y > 1.0 {
        y + (1.0 - y).exp().ln_1p()
    } else {
        1.0 + (y - 1.0).exp().ln_1p()
    }
}

fn log_power_tail(alpha: f64, y0: f64) -> f64 {
    // With t = e^y the integrand is g(y) = (ln(e + e^y))^{-α}, and
    // g(y) - y^{-α} decays like e^{-y}, leaving a closed-form power tail.
    let g = |y: f64| log_e_plus_exp(y).powf(-alpha);
    let split = 2.0f64;
    let mut total = 0.0;
    let start = if y0 < split {
        total += integrate(g, y0, split, 1e-14).value;
        split
    } else {
        y0
    };
    total += start.powf(1.0 - alpha) / (alpha - 1.0);
    total += integrate(|y| g(y) - y.powf(-alpha), start, start + 60.0, 1e-15).value;
    total
}
