mod common;

use bumpcert_core::bellman::check_two_point;
use bumpcert_core::dyadic::{a2_constant, a2_extremal_pair, bump_constant, orlicz_bump_constant, DistFn, Lattice};
use bumpcert_core::embedding::embed_sum_25;
use bumpcert_core::gauge::{orlicz_norm, t_scalar, BumpGauge, YoungFunction};
use bumpcert_core::sampling::{random_weight, trial_rng};
use common::{log_young, orlicz_grid_scan, simpson};

/// `m(c)` for the α = 2 gauge from `m′(r) = (1 + ln(1/r)/2)⁻¹`, integrated
/// in `L = ln(1/r)`.
fn m_alpha_two(c: f64) -> f64 {
    let l0 = (1.0 / c).ln();
    simpson(|l| (-l).exp() / (1.0 + 0.5 * l), l0, l0 + 60.0, 200_000)
}

#[test]
fn two_point_regression_case() {
    let g = BumpGauge::log(2.0).unwrap();
    let n1 = DistFn::new(vec![0.0, 1.0], vec![1.0]).unwrap();
    let n2 = DistFn::new(vec![0.0, 1.0], vec![0.5]).unwrap();
    let chk = check_two_point(1.0, &n1, 0.0, &n2, &g);
    // u(c·1_[0,1)) = 2c − m(c); B = f²/u.
    let u = |c: f64| 2.0 * c - m_alpha_two(c);
    let lhs = 0.5 * (1.0 / u(1.0) + 0.0) - 0.25 / u(0.75);
    let n_mid = 0.75 * 0.5 * (2.0 + (1.0f64 / 0.75).ln()).powi(2);
    let rhs = (2.0 / 9.0) / 4.0 * 0.25 / n_mid;
    assert!((chk.slack.lhs - lhs).abs() < 1e-10, "{} vs {lhs}", chk.slack.lhs);
    assert!((chk.slack.rhs - rhs).abs() < 1e-14, "{} vs {rhs}", chk.slack.rhs);
    assert!(lhs > rhs);
}

#[test]
fn gauge_point_values() {
    let g = BumpGauge::log(2.0).unwrap();
    assert!((g.m_prime((-2.0f64).exp()) - 0.5).abs() < 1e-14);
    assert!((g.m_prime(1.0) - 1.0).abs() < 1e-14);
    for c in [1e-6, 0.01, 0.3, 1.0] {
        assert!((g.m(c) - m_alpha_two(c)).abs() < 1e-10 * c.max(1e-3), "m({c})");
    }
    // −∂T/∂A at (1, 1) by central differences.
    let h = 1e-5;
    let fd = -(t_scalar(&g, 1.0 + h, 1.0).unwrap().value - t_scalar(&g, 1.0, 1.0).unwrap().value) / h;
    let exact = -t_scalar(&g, 1.0, 1.0).unwrap().d_a;
    assert!((exact - 0.5).abs() < 1e-14);
    // One-sided at the corner A = 1, so first order in h.
    assert!((fd - exact).abs() < 1e-4, "{fd}");
}

#[test]
fn orlicz_norm_matches_a_grid_scan() {
    let young = YoungFunction::log_power(2.0).unwrap();
    let pairs = [(0.5, 0.0), (0.5, 2.0)];
    let exact = orlicz_norm(&pairs, &young);
    let grid = orlicz_grid_scan(&pairs, log_young(2.0), 20_000_000);
    assert!((grid - exact).abs() <= 1e-6 * exact, "{grid} vs {exact}");
    let c = 3.7;
    let constant = orlicz_norm(&[(0.3, c), (0.7, c)], &young);
    assert!((constant - c / young.inverse_at_one()).abs() < 1e-12 * c);
    let scaled = orlicz_norm(&[(0.5, 0.0), (0.5, 2.0 * 5.0)], &young);
    assert!((scaled - 5.0 * exact).abs() < 1e-12 * scaled);
}

#[test]
fn a2_is_dominated_by_the_orlicz_constant() {
    // Φ(t) ≥ t gives ⟨w⟩_I ≤ ‖w‖_{L^Φ(I)}, so A₂² ≤ the Orlicz bump constant.
    let phi = YoungFunction::log_power(2.0).unwrap();
    let lat = Lattice::uniform(5, 2).unwrap();
    for trial in 0..1000 {
        let mut rng = trial_rng(0xA2, trial);
        let v = random_weight(&mut rng, &lat).into_inner();
        let w = random_weight(&mut rng, &lat).into_inner();
        let a2 = a2_constant(&lat, &v, &w).value;
        let orl = orlicz_bump_constant(&lat, &v, &w, &phi, &phi).value;
        assert!(a2 * a2 <= orl * (1.0 + 1e-9), "trial {trial}: {a2}² > {orl}");
    }
}

#[test]
fn bump_constant_grows_along_the_extremal_family() {
    let lat = Lattice::uniform(10, 2).unwrap();
    let g = BumpGauge::log(2.0).unwrap();
    let at = |a: f64| {
        let (v, w) = a2_extremal_pair(&lat, a).unwrap();
        bump_constant(&lat, &v, &w, &g, &g).value
    };
    assert!(at(0.9) > at(0.5));
}

#[test]
fn single_term_embedding() {
    // w ≡ 1 and f = ±1 on the two halves: only the root term survives,
    // ‖Δ_root f‖₁² / n_Ψ = 1/Ψ(1) = 1/2.
    let lat = Lattice::uniform(3, 2).unwrap();
    let g = BumpGauge::log(2.0).unwrap();
    let f: Vec<f64> = (0..8).map(|k| if k < 4 { 1.0 } else { -1.0 }).collect();
    let rep = embed_sum_25(&lat, &f, &[1.0; 8], &g);
    assert!((rep.total - 0.5).abs() < 1e-14);
    assert!((rep.per_cell[lat.root()] - 0.5).abs() < 1e-14);
    assert!((rep.ratio - 0.5).abs() < 1e-14);
}
