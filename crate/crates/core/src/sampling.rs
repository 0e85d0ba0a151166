//! Seeded random instances shared by the verifiers and the test suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dyadic::{CarlesonSeq, DistFn, Lattice, Weight};

/// Generator for trial `trial` under `master`: one ChaCha stream per trial,
/// so any trial can be replayed without running the earlier ones.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}

/// A distribution function with up to `max_pieces` pieces. Values are
/// skewed towards 0 to reach the logarithmic regime of the gauges.
pub fn random_dist_fn<R: Rng>(rng: &mut R, max_pieces: usize) -> DistFn {
    let k = rng.gen_range(1..=max_pieces.max(1));
    let p: f64 = rng.gen_range(1.0..6.0);
    let mut values: Vec<f64> = (0..k).map(|_| rng.gen::<f64>().powf(p).max(1e-12)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    if rng.gen_bool(0.5) {
        values[0] = 1.0;
    }
    let mut knots = vec![0.0];
    for _ in 0..k {
        let len = rng.gen_range(-3.0f64..3.0).exp();
        knots.push(knots.last().unwrap() + len);
    }
    // Duplicated values merge into one piece.
    let mut kk = vec![0.0];
    let mut vv: Vec<f64> = Vec::new();
    for j in 0..k {
        if vv.last() == Some(&values[j]) {
            *kk.last_mut().unwrap() = knots[j + 1];
        } else {
            vv.push(values[j]);
            kk.push(knots[j + 1]);
        }
    }
    DistFn::new(kk, vv).expect("generated a valid distribution")
}

/// Convex weights on `n` points, occasionally with zero entries.
pub fn random_alphas<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut a: Vec<f64> = (0..n)
        .map(|_| {
            if n > 2 && rng.gen_bool(0.05) {
                0.0
            } else {
                rng.gen_range(0.02..1.0)
            }
        })
        .collect();
    if a.iter().all(|&x| x == 0.0) {
        a[0] = 1.0;
    }
    let total: f64 = a.iter().sum();
    a.iter_mut().for_each(|x| *x /= total);
    a
}

/// A real number spread over several orders of magnitude, either sign.
pub fn random_scalar<R: Rng>(rng: &mut R) -> f64 {
    let mag = rng.gen_range(-3.0f64..1.0).exp();
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Standard normal leaf vector.
pub fn random_leaf_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| -> f64 { StandardNormal.sample(rng) }).collect()
}

/// Random weight mixing lognormal, power-like and sparse profiles.
pub fn random_weight<R: Rng>(rng: &mut R, lattice: &Lattice) -> Weight {
    let leaves = lattice.num_leaves();
    let values: Vec<f64> = match rng.gen_range(0..3) {
        0 => {
            let sigma = rng.gen_range(0.1..2.5);
            (0..leaves)
                .map(|_| { let z: f64 = StandardNormal.sample(rng); (sigma * z).exp() })
                .collect()
        }
        1 => {
            let a = rng.gen_range(-0.95..3.0);
            let centre = rng.gen::<f64>();
            lattice
                .leaf_intervals()
                .into_iter()
                .map(|(lo, hi)| (0.5 * (lo + hi) - centre).abs().max(1e-9).powf(a))
                .collect()
        }
        _ => {
            let keep = rng.gen_range(0.05..0.9);
            (0..leaves)
                .map(|_| if rng.gen_bool(keep) { rng.gen_range(0.0..10.0) } else { 0.0 })
                .collect()
        }
    };
    Weight::new(values).expect("nonnegative by construction")
}

/// Sparse random Carleson sequence scaled so its largest load is one.
pub fn random_carleson<R: Rng>(rng: &mut R, lattice: &Lattice) -> CarlesonSeq {
    let density = rng.gen_range(0.05..1.0);
    let raw: Vec<f64> = (0..lattice.num_cells())
        .map(|_| if rng.gen_bool(density) { rng.gen::<f64>() } else { 0.0 })
        .collect();
    CarlesonSeq::normalized(lattice, raw).expect("normalised by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = trial_rng(42, 7).gen();
        let _ = trial_rng(42, 6).gen::<f64>();
        let b: f64 = trial_rng(42, 7).gen();
        assert_eq!(a, b);
        assert_ne!(a, trial_rng(42, 8).gen::<f64>());
    }

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = trial_rng(1, 0);
        let lat = Lattice::uniform(5, 2).unwrap();
        for _ in 0..200 {
            let n = random_dist_fn(&mut rng, 12);
            assert!(!n.is_zero());
            let a = random_alphas(&mut rng, 5);
            assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let w = random_weight(&mut rng, &lat);
            assert_eq!(w.len(), 32);
            let c = random_carleson(&mut rng, &lat);
            assert!(c.loads().iter().all(|&m| m <= 1.0 + 1e-12));
        }
    }
}
