#![allow(dead_code)]

use bumpcert_core::dyadic::{DistFn, StepFn};
use bumpcert_core::gauge::BumpGauge;
use rand::Rng;

/// Log gauges for the exponents exercised throughout, plus the gauge built
/// from `t·(ln(e + t))²`.
pub fn gauges() -> Vec<(String, BumpGauge)> {
    let mut out: Vec<(String, BumpGauge)> = [1.5, 2.0, 3.0]
        .iter()
        .map(|&a| (format!("log α={a}"), BumpGauge::log(a).unwrap()))
        .collect();
    out.push((
        "young-log α=2".into(),
        bumpcert_core::gauge::GaugeSpec::YoungLog { alpha: 2.0 }.build().unwrap(),
    ));
    out
}

/// A direction `ΔN` on the pieces of `n` such that `N ± ΔN` stay
/// distribution functions: each entry is bounded by half the gaps to the
/// neighbouring values (with 1 above the first piece and 0 below the last).
pub fn random_direction<R: Rng>(rng: &mut R, n: &DistFn) -> StepFn {
    let step = n.as_step();
    let v = step.values();
    let k = v.len();
    let values: Vec<f64> = (0..k)
        .map(|j| {
            let above = if j == 0 { 1.0 - v[0] } else { v[j - 1] - v[j] };
            let below = if j + 1 == k { v[j] } else { v[j] - v[j + 1] };
            0.5 * above.min(below) * rng.gen_range(-1.0..1.0)
        })
        .collect();
    StepFn::new(step.knots().to_vec(), values).unwrap()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Luxemburg norm by scanning `λ` on a geometric grid: the first grid
/// point whose modular is at most one.
pub fn orlicz_grid_scan<F: Fn(f64) -> f64>(pairs: &[(f64, f64)], phi: F, points: usize) -> f64 {
    let total: f64 = pairs.iter().map(|p| p.0).sum();
    let max = pairs.iter().fold(0.0f64, |m, p| m.max(p.1));
    if max == 0.0 {
        return 0.0;
    }
    let (lo, hi) = (max * 1e-4, max * 1e2);
    (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .find(|&l| pairs.iter().map(|&(m, v)| m * phi(v / l)).sum::<f64>() / total <= 1.0)
        .unwrap_or(hi)
}

/// `t·(ln(e + t))^α`.
pub fn log_young(alpha: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| t * (std::f64::consts::E + t).ln().powf(alpha)
}
