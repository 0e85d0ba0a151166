//! Scalar numerical helpers: bracketing bisection and adaptive Gauss–Kronrod
//! quadrature on finite intervals.

/// Relative bracket width at which bisections stop.
pub const BISECT_REL_TOL: f64 = 1e-12;
/// Hard cap on bisection steps.
pub const BISECT_MAX_ITER: usize = 200;

/// Finds the crossing of a monotone predicate on `[lo, hi]`.
///
/// `pred(lo)` must be true and `pred(hi)` false; the returned point is the
/// midpoint of the final bracket.
pub fn bisect<F>(mut lo: f64, mut hi: f64, mut pred: F) -> f64
where
    F: FnMut(f64) -> bool,
{
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if (hi - lo) <= BISECT_REL_TOL * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

// Kronrod 15-point nodes/weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subintervals with the largest error estimate are split until the summed
/// estimate drops below `abs_tol` or `max_intervals` is reached. Interior
/// nodes only, so integrable endpoint singularities are tolerated.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Quadrature {
    integrate_with_limit(f, a, b, abs_tol, 4000)
}

pub fn integrate_with_limit<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total_err = e;
    while total_err > abs_tol && parts.len() < max_intervals && total_err.is_finite() {
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval exhausted at machine precision.
            break;
        }
        let left = gk15(&f, lo, mid);
        let right = gk15(&f, mid, hi);
        parts.push((lo, mid, left.0, left.1));
        parts.push((mid, hi, right.0, right.1));
        total_err = parts.iter().map(|p| p.3).sum();
    }
    // Sum smallest first.
    let mut vals: Vec<f64> = parts.iter().map(|p| p.2).collect();
    vals.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    Quadrature {
        value: vals.iter().sum(),
        error: total_err,
        converged: total_err <= abs_tol,
    }
}

/// Upper incomplete gamma scaled as `Γ(a, x)·eˣ·x^{-a}` for `x > 0` and any real `a`,
/// evaluated by the modified Lentz algorithm on the Legendre continued fraction.
pub fn scaled_upper_gamma(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    // Γ(a,x) = e^{-x} x^a · h
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect(0.0, 2.0, |x| x * x < 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn integrates_polynomial_exactly() {
        let q = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-13);
        assert!((q.value - 8.0).abs() < 1e-13);
        assert!(q.converged);
    }

    #[test]
    fn handles_log_endpoint_singularity() {
        // ∫₀¹ -ln x dx = 1
        let q = integrate(|x: f64| -x.ln(), 0.0, 1.0, 1e-11);
        assert!((q.value - 1.0).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn incomplete_gamma_matches_known_values() {
        // Γ(1, x) = e^{-x}, so the scaled value is x^{-1}.
        let x = 2.5;
        assert!((scaled_upper_gamma(1.0, x) - 1.0 / x).abs() < 1e-14);
        // Γ(0, 1) = E1(1) = 0.21938393439552...
        let e1 = scaled_upper_gamma(0.0, 1.0) * (-1.0f64).exp();
        assert!((e1 - 0.219_383_934_395_520_3).abs() < 1e-13);
        // Negative order against quadrature: Γ(-0.5, 2) = ∫₂^∞ t^{-1.5} e^{-t} dt.
        let q = integrate(|u: f64| {
            let t = 2.0 + u / (1.0 - u);
            t.powf(-1.5) * (-t).exp() / ((1.0 - u) * (1.0 - u))
        }, 0.0, 1.0, 1e-14);
        let cf = scaled_upper_gamma(-0.5, 2.0) * (-2.0f64).exp() * 2f64.powf(-0.5);
        assert!((cf - q.value).abs() < 1e-12, "{cf} vs {}", q.value);
    }
}
