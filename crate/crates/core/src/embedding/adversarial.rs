use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{n_psi_all, Lattice};
use crate::gauge::BumpGauge;
use crate::sampling::random_leaf_vector;

use super::sums::embed_sum_25_with;

/// Restarts used by [`adversarial_ratio`].
pub const RESTARTS: usize = 8;
/// Power steps per sign-fixing round.
const INNER_STEPS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialResult {
    /// Best `f` found; its ratio is the reported value.
    pub f: Vec<f64>,
    pub ratio: f64,
    /// Best ratio after each round, per restart.
    pub history: Vec<Vec<f64>>,
}

/// The difference-sum ratio as a quadratic form once the signs of every
/// `Δ_I(f w^{1/2})` are frozen. Coordinates are `z = μ^{1/2} f`.
struct SignForm {
    /// Per interior cell: leaf range start and the row `r_I` over its leaves.
    rows: Vec<(usize, Vec<f64>, f64)>,
}

impl SignForm {
    fn new(lattice: &Lattice, f: &[f64], sw: &[f64], mu: &[f64], n_psi: &[f64]) -> Self {
        let fw: Vec<f64> = f.iter().zip(sw).map(|(a, b)| a * b).collect();
        let avg = lattice.cell_averages(&fw);
        let mut rows = Vec::new();
        for id in lattice.interior() {
            if n_psi[id] <= 0.0 {
                continue;
            }
            let cell = lattice.cell(id);
            let mass = cell.mass;
            let kids = cell.children.clone();
            let signs: Vec<f64> = kids
                .clone()
                .map(|k| if avg[k] - avg[id] >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            let mean: f64 = kids.clone().zip(&signs).map(|(k, s)| s * lattice.mass(k)).sum::<f64>() / mass;
            let mut row = Vec::with_capacity(cell.leaves.len());
            for (k, s) in kids.zip(&signs) {
                for x in lattice.cell(k).leaves.clone() {
                    row.push(mu[x].sqrt() * sw[x] * (s - mean));
                }
            }
            rows.push((cell.leaves.start, row, 1.0 / (n_psi[id] * mass)));
        }
        Self { rows }
    }

    fn apply(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        for (start, row, weight) in &self.rows {
            let dot: f64 = row.iter().zip(&z[*start..]).map(|(r, x)| r * x).sum();
            let c = dot * weight;
            for (o, r) in out[*start..*start + row.len()].iter_mut().zip(row) {
                *o += c * r;
            }
        }
        out
    }
}

fn ratio_of(lattice: &Lattice, f: &[f64], w: &[f64], n_psi: &[f64], bound: f64) -> f64 {
    embed_sum_25_with(lattice, f, w, n_psi, bound).ratio
}

/// Searches for `f` maximising the difference-sum ratio for the weight `w`.
///
/// Each round freezes the signs of `Δ_I(f w^{1/2})`, which makes the sum a
/// quadratic form bounded above by the true sum, and runs power steps on it
/// warm-started at the current `f`. The true ratio therefore never drops
/// between rounds. `budget` is the number of rounds per restart; the result
/// is a lower bound for the supremum, not a certified maximiser.
pub fn adversarial_ratio(lattice: &Lattice, w: &[f64], gauge: &BumpGauge, budget: usize, seed: u64) -> AdversarialResult {
    let n_psi = n_psi_all(lattice, w, gauge);
    let mu = lattice.leaf_masses();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let bound = gauge.c_25();
    let runs: Vec<(Vec<f64>, f64, Vec<f64>)> = (0..RESTARTS)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut f = random_leaf_vector(&mut rng, mu.len());
            let mut best = ratio_of(lattice, &f, w, &n_psi, bound);
            let mut history = Vec::with_capacity(budget);
            for _ in 0..budget {
                let form = SignForm::new(lattice, &f, &sw, &mu, &n_psi);
                let mut z: Vec<f64> = f.iter().zip(&mu).map(|(a, m)| a * m.sqrt()).collect();
                for _ in 0..INNER_STEPS {
                    let y = form.apply(&z);
                    let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        break;
                    }
                    z = y.into_iter().map(|a| a / norm).collect();
                }
                let candidate: Vec<f64> = z.iter().zip(&mu).map(|(a, m)| a / m.sqrt()).collect();
                let ratio = ratio_of(lattice, &candidate, w, &n_psi, bound);
                if ratio > best {
                    best = ratio;
                    f = candidate;
                }
                history.push(best);
            }
            (f, best, history)
        })
        .collect();
    let (f, ratio) = runs
        .iter()
        .fold((Vec::new(), f64::NEG_INFINITY), |acc, (f, r, _)| if *r > acc.1 { (f.clone(), *r) } else { acc });
    AdversarialResult {
        f,
        ratio: ratio.max(0.0),
        history: runs.into_iter().map(|r| r.2).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_weight, trial_rng};

    #[test]
    fn beats_single_haar_term() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(5, 2).unwrap();
        let r = adversarial_ratio(&lat, &[1.0; 32], &g, 5, 1);
        assert!(r.ratio >= 0.5);
        assert!(r.ratio <= g.c_25());
    }

    #[test]
    fn monotone_in_budget() {
        let g = BumpGauge::log(2.0).unwrap();
        let lat = Lattice::uniform(5, 2).unwrap();
        let w = random_weight(&mut trial_rng(30, 0), &lat);
        let mut last = 0.0;
        for budget in [0, 1, 3, 6] {
            let r = adversarial_ratio(&lat, &w, &g, budget, 4).ratio;
            assert!(r >= last);
            last = r;
        }
    }
}
