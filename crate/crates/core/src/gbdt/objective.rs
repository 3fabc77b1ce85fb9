//! Loss derivatives with respect to raw scores.

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Logistic log-loss of raw score `score` for target `y ∈ {0, 1}`.
pub fn binary_loss(score: f64, y: f64) -> f64 {
    // log(1 + e^s) − y·s, written to avoid overflow
    let softplus = if score > 0.0 { score + (-score).exp().ln_1p() } else { score.exp().ln_1p() };
    softplus - y * score
}

/// `(p − y, p(1 − p))` with `p = sigmoid(score)`.
pub fn binary_grad_hess(score: f64, y: f64) -> (f64, f64) {
    let p = sigmoid(score);
    (p - y, p * (1.0 - p))
}

/// Replaces raw scores with softmax probabilities.
pub fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps = 1e-5;
        for _ in 0..20 {
            let s: f64 = rng.random_range(-6.0..6.0);
            for y in [0.0, 1.0] {
                let (g, h) = binary_grad_hess(s, y);
                let fd_g = (binary_loss(s + eps, y) - binary_loss(s - eps, y)) / (2.0 * eps);
                let fd_h = (binary_grad_hess(s + eps, y).0 - binary_grad_hess(s - eps, y).0) / (2.0 * eps);
                assert!((g - fd_g).abs() < 1e-6, "g {g} vs {fd_g} at {s}");
                assert!((h - fd_h).abs() < 1e-6, "h {h} vs {fd_h} at {s}");
            }
        }
    }

    #[test]
    fn softmax_normalizes() {
        let mut v = [1000.0, 999.0, -5.0];
        softmax_in_place(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(v[0] > v[1] && v[1] > v[2]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) == 1.0 && sigmoid(-800.0) >= 0.0);
    }
}
