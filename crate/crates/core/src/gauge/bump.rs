use serde::{Deserialize, Serialize};

use super::young::YoungFunction;
use crate::error::{Error, Result};
use crate::numeric::{self, integrate, scaled_upper_gamma};

/// Wire description of a gauge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GaugeSpec {
    /// Shifted log gauge `Ψ₀(s) = (α + ln(1/s))^α`.
    Log { alpha: f64 },
    /// Gauge derived parametrically from `Φ(t) = t·(ln(e + t))^α`.
    YoungLog { alpha: f64 },
}

impl GaugeSpec {
    pub fn build(&self) -> Result<BumpGauge> {
        match *self {
            GaugeSpec::Log { alpha } => BumpGauge::log(alpha),
            GaugeSpec::YoungLog { alpha } => {
                BumpGauge::from_young(YoungFunction::log_power(alpha)?, 1e-9)
            }
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            GaugeSpec::Log { alpha } | GaugeSpec::YoungLog { alpha } => alpha,
        }
    }
}

#[derive(Debug, Clone)]
enum Family {
    Log {
        alpha: f64,
    },
    Parametric {
        young: YoungFunction,
        /// lower end of the parameter range
        t_min: f64,
        /// ln t at s = 1
        y_one: f64,
    },
}

/// A normalized bump gauge Ψ together with φ(s) = sΨ(s), the companion
/// m(s) (m(0) = m′(0) = 0, m″ = 1/φ) and the constants derived from it.
///
/// Internally every evaluation goes through `L = ln(1/s)`, which keeps the
/// region near `s = 0` representable.
#[derive(Debug, Clone)]
pub struct BumpGauge {
    family: Family,
    norm: f64,
    psi_one: f64,
    s_star: f64,
}

impl BumpGauge {
    /// `Ψ(s) = k·(α + ln(1/s))^α` with `k = α^{1-α}/(α-1)`.
    pub fn log(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::param(
                "alpha",
                format!("1/phi is not integrable at 0 unless alpha > 1 (got {alpha})"),
            ));
        }
        let norm = alpha.powf(1.0 - alpha) / (alpha - 1.0);
        Ok(Self::finish(Family::Log { alpha }, norm))
    }

    /// Builds Ψ from a Young function through `Ψ(s) = Φ′(t)` at
    /// `s = 1/(Φ(t)Φ′(t))`, then normalizes so that `∫₀¹ ds/φ = 1`.
    ///
    /// `t_min` bounds the parameter range from below; it must reach `s = 1`.
    pub fn from_young(young: YoungFunction, t_min: f64) -> Result<Self> {
        if !(t_min > 0.0) {
            return Err(Error::param("t_min", "must be positive"));
        }
        if young.log_phi_dphi(t_min) > 0.0 {
            return Err(Error::Domain {
                value: 1.0,
                reason: format!("s = 1 is not reachable for t >= {t_min}"),
            });
        }
        let y_one = solve_log_parameter(&young, t_min.ln(), 0.0);
        // ∫₀¹ ds/φ₀ = ∫_{t₁}^∞ dt/Φ + 1/Φ′(t₁)
        let norm = young.tail_from(y_one) + 1.0 / young.deriv_at(y_one);
        Ok(Self::finish(
            Family::Parametric {
                young,
                t_min,
                y_one,
            },
            norm,
        ))
    }

    fn finish(family: Family, norm: f64) -> Self {
        let mut g = Self {
            family,
            norm,
            psi_one: f64::NAN,
            s_star: f64::NAN,
        };
        g.psi_one = g.psi_log(0.0);
        g.s_star = if g.psi_one >= 1.0 {
            1.0
        } else {
            let mut hi = 1.0;
            while g.psi_log(hi) < 1.0 {
                hi *= 2.0;
            }
            let l = numeric::bisect(0.0, hi, |l| g.psi_log(l) < 1.0);
            (-l).exp()
        };
        g
    }

    pub fn alpha(&self) -> Option<f64> {
        match &self.family {
            Family::Log { alpha } => Some(*alpha),
            Family::Parametric { young, .. } => young.alpha(),
        }
    }

    pub fn young(&self) -> Option<&YoungFunction> {
        match &self.family {
            Family::Log { .. } => None,
            Family::Parametric { young, .. } => Some(young),
        }
    }

    /// Normalization constant k with Ψ = k·Ψ₀.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// sup{s ∈ (0,1] : Ψ(s) ≥ 1}.
    pub fn s_star(&self) -> f64 {
        self.s_star
    }

    /// max(1, 1/s*): the threshold constant in `⟨w⟩ ≤ C_Ψ·n_Ψ`.
    pub fn c_psi(&self) -> f64 {
        1f64.max(1.0 / self.s_star)
    }

    /// 1/Ψ(1): the sharp constant in `⟨w⟩ ≤ C·n_Ψ`, never larger than [`c_psi`](Self::c_psi).
    pub fn c_w(&self) -> f64 {
        1.0 / self.psi_one
    }

    /// Constant of the second-derivative bound, `2/(8 + 2·C_w)`.
    pub fn c(&self) -> f64 {
        2.0 / (8.0 + 2.0 * self.c_w())
    }

    /// Embedding constant for the difference sum, `16/c`.
    pub fn c_25(&self) -> f64 {
        16.0 / self.c()
    }

    /// Embedding constant for the Carleson sum.
    pub fn c_26(&self) -> f64 {
        16.0
    }

    /// Raw (unnormalized) Ψ₀. For parametric gauges it is defined wherever the
    /// parameter range `t ≥ t_min` reaches.
    pub fn psi_raw(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain {
                value: s,
                reason: "gauge is defined for s > 0".into(),
            });
        }
        let l = -s.ln();
        match &self.family {
            Family::Log { alpha } => {
                if s > 1.0 {
                    return Err(Error::Domain {
                        value: s,
                        reason: "log gauge is defined on (0, 1]".into(),
                    });
                }
                Ok((alpha + l).powf(*alpha))
            }
            Family::Parametric { young, t_min, .. } => {
                if l < young.log_phi_dphi(*t_min) {
                    return Err(Error::Domain {
                        value: s,
                        reason: format!("beyond the parametric range t >= {t_min}"),
                    });
                }
                Ok(young.deriv_at(solve_log_parameter(young, t_min.ln(), l)))
            }
        }
    }

    /// Parameter t with `s = 1/(Φ(t)Φ′(t))` for parametric gauges.
    pub fn parameter_at(&self, s: f64) -> Option<f64> {
        match &self.family {
            Family::Log { .. } => None,
            Family::Parametric { young, y_one, .. } => {
                let l = -clamp_unit(s).ln();
                Some(solve_log_parameter(young, *y_one, l).exp())
            }
        }
    }

    pub fn psi(&self, s: f64) -> f64 {
        let s = clamp_unit(s);
        if s == 0.0 {
            return f64::INFINITY;
        }
        self.psi_log(-s.ln())
    }

    pub fn phi(&self, s: f64) -> f64 {
        let s = clamp_unit(s);
        if s == 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Log { .. } => s * self.psi(s),
            Family::Parametric { young, y_one, .. } => {
                let y = solve_log_parameter(young, *y_one, -s.ln());
                self.norm * (-young.log_eval_at(y)).exp()
            }
        }
    }

    pub fn phi_prime(&self, s: f64) -> f64 {
        let s = clamp_unit(s);
        match &self.family {
            Family::Log { alpha } => {
                if s == 0.0 {
                    return f64::INFINITY;
                }
                let l = -s.ln();
                self.norm * (alpha + l).powf(alpha - 1.0) * l
            }
            Family::Parametric { young, y_one, .. } => {
                if s == 0.0 {
                    return f64::INFINITY;
                }
                let t = solve_log_parameter(young, *y_one, -s.ln()).exp();
                let (f, d, d2) = (young.eval(t), young.deriv(t), young.second_deriv(t));
                self.norm * d * d * d / (d * d + f * d2)
            }
        }
    }

    /// m′(s) = ∫₀^s dr/φ(r).
    pub fn m_prime(&self, s: f64) -> f64 {
        let s = clamp_unit(s);
        if s == 0.0 {
            return 0.0;
        }
        self.m_prime_log(-s.ln())
    }

    /// m(s) = ∫₀^s m′(r) dr.
    pub fn m(&self, s: f64) -> f64 {
        let s = clamp_unit(s);
        if s == 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Log { alpha } => {
                // m(s) = α^{α-1} e^{α} Γ(2-α, α+L), written in scaled form.
                let l = -s.ln();
                let x = alpha + l;
                alpha.powf(alpha - 1.0) * s * x.powf(2.0 - alpha) * scaled_upper_gamma(2.0 - alpha, x)
            }
            Family::Parametric { young, y_one, .. } => {
                // m(s) = s·m′(s) − ∫₀^s dr/Ψ(r), with r = e^{−λ(y)}, λ(y) = ln(ΦΦ′)(eʸ).
                let l = -s.ln();
                let y_s = solve_log_parameter(young, *y_one, l);
                let integrand = |y: f64| {
                    let t = y.exp();
                    let (f, d) = (young.eval(t), young.deriv(t));
                    let dlam = t * (d / f + young.second_deriv(t) / d);
                    let v = (-young.log_phi_dphi_at(y)).exp() * dlam / (self.norm * young.deriv_at(y));
                    if v.is_finite() { v } else { 0.0 }
                };
                let mut tail = 0.0;
                let mut start = y_s;
                loop {
                    let chunk = integrate(integrand, start, start + 4.0, 1e-16).value;
                    tail += chunk;
                    start += 4.0;
                    if chunk.abs() <= 1e-17 * tail.abs().max(1e-300) || start > y_s + 700.0 {
                        break;
                    }
                }
                s * self.m_prime_log(l) - tail
            }
        }
    }

    pub(crate) fn psi_log(&self, l: f64) -> f64 {
        match &self.family {
            Family::Log { alpha } => self.norm * (alpha + l).powf(*alpha),
            Family::Parametric { young, y_one, .. } => {
                self.norm * young.deriv_at(solve_log_parameter(young, *y_one, l))
            }
        }
    }

    pub(crate) fn m_prime_log(&self, l: f64) -> f64 {
        match &self.family {
            Family::Log { alpha } => (1.0 + l / alpha).powf(1.0 - alpha),
            Family::Parametric { young, y_one, .. } => {
                let y = solve_log_parameter(young, *y_one, l);
                (young.tail_from(y) + 1.0 / young.deriv_at(y)) / self.norm
            }
        }
    }

    /// Constant `C_L` in `n_Ψ(N_I^w) ≤ C_L·‖w‖_{L^Φ(I)}` for the Young function
    /// this gauge was derived from.
    ///
    /// For `‖w‖_Φ ≤ 1` we have `∫N Φ′ ≤ 1`. Below `t₁` (where `s = 1`) the
    /// integrand `φ₀(N)` is at most `φ₀(1) = Φ′(t₁)`; above `t₁` it is at most
    /// `NΦ′` where `Ψ₀(N) ≤ Φ′` and at most `1/Φ` elsewhere. Hence
    /// `C_L = k·(t₁Φ′(t₁) + 1 + ∫_{t₁}^∞ dt/Φ)`.
    pub fn lemma_constant(&self) -> Option<f64> {
        match &self.family {
            Family::Log { .. } => None,
            Family::Parametric { young, y_one, .. } => Some(
                self.norm
                    * (y_one.exp() * young.deriv_at(*y_one) + 1.0 + young.tail_from(*y_one)),
            ),
        }
    }

    /// Diagnostics for the domination hypothesis `Ψ(s) ≤ C·Φ′(t)` at
    /// `s = 1/(Φ(t)Φ′(t))`: the largest ratio observed for `t ≥ threshold`
    /// on a geometric grid up to `t = 1e12`.
    pub fn domination_ratio(&self, young: &YoungFunction, threshold: f64) -> f64 {
        let points = 400;
        (0..points)
            .map(|i| threshold * (1e12 / threshold).powf(i as f64 / (points - 1) as f64))
            .filter_map(|t| {
                let l = young.log_phi_dphi(t);
                (l >= 0.0).then(|| self.psi_log(l) / young.deriv(t))
            })
            .fold(0.0, f64::max)
    }

    /// Evaluates the structural laws of the gauge on a grid of `points` nodes.
    pub fn laws(&self, points: usize) -> GaugeLaws {
        let grid = unit_grid(points);
        let mut report = GaugeLaws {
            normalization: self.normalization_by_quadrature(),
            psi_decreasing: true,
            phi_increasing: true,
            m_prime_in_unit: true,
            m_prime_increasing: true,
            m_below_identity: true,
            phi_prime_bound: true,
        };
        let mut prev: Option<(f64, f64, f64)> = None;
        for &s in &grid {
            let (psi, phi, mp) = (self.psi(s), self.phi(s), self.m_prime(s));
            let m = self.m(s);
            if let Some((p_psi, p_phi, p_mp)) = prev {
                report.psi_decreasing &= psi <= p_psi * (1.0 + 1e-13);
                report.phi_increasing &= phi >= p_phi * (1.0 - 1e-13);
                report.m_prime_increasing &= mp >= p_mp * (1.0 - 1e-13);
            }
            report.m_prime_in_unit &= (0.0..=1.0 + 1e-12).contains(&mp);
            report.m_below_identity &= m >= 0.0 && m <= s * (1.0 + 1e-12);
            report.phi_prime_bound &= s * self.phi_prime(s) <= phi * (1.0 + 1e-12);
            prev = Some((psi, phi, mp));
        }
        report
    }

    /// `∫₀¹ ds/φ(s)` by adaptive quadrature.
    pub fn normalization_by_quadrature(&self) -> f64 {
        self.inverse_phi_integral(0.0)
    }

    /// `∫₀^{e^{-l0}} ds/φ(s)` by adaptive quadrature, through `s = e^{-L}` and
    /// `L = l0 + eˣ - 1`, which turns the algebraic decay in `L` into an
    /// exponential one in `x`.
    pub(crate) fn inverse_phi_integral(&self, l0: f64) -> f64 {
        let integrand = |x: f64| {
            let l = l0 + x.exp_m1();
            x.exp() / self.psi_log(l)
        };
        let mut total = 0.0;
        let mut start = 0.0;
        loop {
            let chunk = integrate(integrand, start, start + 8.0, 1e-14).value;
            total += chunk;
            start += 8.0;
            if chunk.abs() < 1e-16 * total.abs().max(1e-300) || start > 700.0 {
                break;
            }
        }
        total
    }
}

/// Outcome of [`BumpGauge::laws`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeLaws {
    /// `∫₀¹ ds/φ` by quadrature; should be 1.
    pub normalization: f64,
    pub psi_decreasing: bool,
    pub phi_increasing: bool,
    pub m_prime_in_unit: bool,
    pub m_prime_increasing: bool,
    pub m_below_identity: bool,
    /// `sφ′(s) ≤ φ(s)`.
    pub phi_prime_bound: bool,
}

impl GaugeLaws {
    pub fn all_hold(&self, tol: f64) -> bool {
        (self.normalization - 1.0).abs() <= tol
            && self.psi_decreasing
            && self.phi_increasing
            && self.m_prime_in_unit
            && self.m_prime_increasing
            && self.m_below_identity
            && self.phi_prime_bound
    }
}

/// Half geometric (down to 1e-12), half uniform grid of (0, 1], sorted.
pub fn unit_grid(points: usize) -> Vec<f64> {
    let half = points / 2;
    let mut grid: Vec<f64> = (0..half)
        .map(|i| 1e-12 * 1e12f64.powf(i as f64 / half as f64))
        .chain((1..=points - half).map(|i| i as f64 / (points - half) as f64))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid
}

fn clamp_unit(s: f64) -> f64 {
    debug_assert!(s <= 1.0 + 1e-9, "gauge argument {s} exceeds 1");
    s.clamp(0.0, 1.0)
}

/// Solves `ln Φ(eʸ) + ln Φ′(eʸ) = l` for `y ≥ y_lo` by bisection.
fn solve_log_parameter(young: &YoungFunction, y_lo: f64, l: f64) -> f64 {
    let mut hi = y_lo.max(0.0) + 1.0;
    while young.log_phi_dphi_at(hi) < l {
        hi = 2.0 * hi + 1.0;
    }
    let mut lo = y_lo;
    // Newton on λ(y) = ln(ΦΦ′)(eʸ) with a difference slope, kept inside the bracket.
    let mut y = l.clamp(lo, hi);
    for _ in 0..numeric::BISECT_MAX_ITER {
        let g = young.log_phi_dphi_at(y) - l;
        if g == 0.0 {
            return y;
        }
        if g < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let h = 1e-6 * (1.0 + y.abs());
        let slope = (young.log_phi_dphi_at(y + h) - young.log_phi_dphi_at(y - h)) / (2.0 * h);
        let mut next = y - g / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 1e-15 * (1.0 + y.abs()) || hi - lo <= 1e-15 * (1.0 + y.abs()) {
            return next;
        }
        y = next;
    }
    y
}
