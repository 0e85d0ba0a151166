/// Largest `n` for which [`balanced_signs`] enumerates polytope vertices.
pub const VERTEX_ENUMERATION_MAX: usize = 8;

/// Maximises `Σ α_k β_k x_k` over `|β_k| ≤ 1`, `Σ α_k β_k = 0`.
///
/// Small instances enumerate the vertices of the polytope (all coordinates
/// `±1` but at most one); larger ones use the greedy exchange on
/// `γ_k = α_k β_k`, which is exact for this fractional knapsack.
pub fn balanced_signs(alpha: &[f64], x: &[f64]) -> Vec<f64> {
    assert_eq!(alpha.len(), x.len());
    if x.iter().all(|&v| v == 0.0) {
        return vec![0.0; x.len()];
    }
    if x.len() <= VERTEX_ENUMERATION_MAX {
        balanced_signs_vertices(alpha, x)
    } else {
        balanced_signs_greedy(alpha, x)
    }
}

/// `Σ α_k β_k x_k`.
pub fn signed_value(alpha: &[f64], beta: &[f64], x: &[f64]) -> f64 {
    alpha.iter().zip(beta).zip(x).map(|((a, b), v)| a * b * v).sum()
}

/// `‖x‖_{ℓ¹(α)}`.
pub fn weighted_l1(alpha: &[f64], x: &[f64]) -> f64 {
    alpha.iter().zip(x).map(|(a, v)| a * v.abs()).sum()
}

pub fn balanced_signs_vertices(alpha: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut best = vec![0.0; n];
    let mut best_value = f64::NEG_INFINITY;
    let mut beta = vec![0.0; n];
    for free in 0..n {
        if alpha[free] <= 0.0 {
            continue;
        }
        for mask in 0u32..(1 << (n - 1)) {
            let mut bit = 0;
            let mut sum = 0.0;
            for k in 0..n {
                if k == free {
                    continue;
                }
                beta[k] = if mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
                bit += 1;
                sum += alpha[k] * beta[k];
            }
            let b = -sum / alpha[free];
            if b.abs() > 1.0 + 1e-12 {
                continue;
            }
            beta[free] = b.clamp(-1.0, 1.0);
            let value = signed_value(alpha, &beta, x);
            if value > best_value {
                best_value = value;
                best.copy_from_slice(&beta);
            }
        }
    }
    best
}

pub fn balanced_signs_greedy(alpha: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut beta = vec![-1.0; n];
    // Start from γ = −α and raise coordinates in decreasing order of x until Σγ = 0.
    let mut budget: f64 = alpha.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[j].total_cmp(&x[i]));
    for k in order {
        if alpha[k] <= 0.0 {
            beta[k] = 0.0;
            continue;
        }
        let room = 2.0 * alpha[k];
        if budget >= room {
            beta[k] = 1.0;
            budget -= room;
        } else {
            beta[k] = -1.0 + budget / alpha[k];
            budget = 0.0;
        }
    }
    beta
}
