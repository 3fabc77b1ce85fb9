#![allow(dead_code)]

use boostkit::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Two classes of clipped Gaussians: the first `informative` columns of the
/// positive class are shifted by `shift`, the rest are pure noise. Positive
/// rows come first so the positive label gets class index 0.
pub fn two_gaussian(n_pos: usize, n_neg: usize, m: usize, informative: usize, shift: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::with_capacity((n_pos + n_neg) * m);
    let mut y = Vec::with_capacity(n_pos + n_neg);
    for i in 0..n_pos + n_neg {
        let pos = i < n_pos;
        for j in 0..m {
            let mu = if pos && j < informative { 3.0 + shift } else { 3.0 };
            x.push(f64::max(0.0, mu + noise.sample(&mut rng)));
        }
        y.push(usize::from(!pos));
    }
    Dataset::from_rows(x, m, y, vec!["covid".into(), "healthy".into()]).unwrap()
}

/// Three Gaussian classes separated along different columns.
pub fn three_gaussian(per_class: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for c in 0..3 {
        for _ in 0..per_class {
            for j in 0..m {
                let mu = if j % 3 == c && j < 9 { 4.5 } else { 3.0 };
                x.push(f64::max(0.0, mu + noise.sample(&mut rng)));
            }
            y.push(c);
        }
    }
    Dataset::from_rows(x, m, y, vec!["covid".into(), "healthy".into(), "pneumonia".into()]).unwrap()
}

/// `groups` blocks of `group_size` one-hot-like columns: every row has exactly
/// one non-zero column (value 1..=4) per block.
pub fn sparse_blocks(n: usize, groups: usize, group_size: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = groups * group_size;
    let mut x = vec![0.0; n * m];
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let mut picks = Vec::with_capacity(groups);
        for g in 0..groups {
            let k = rng.random_range(0..group_size);
            let v = rng.random_range(1..=4) as f64;
            x[i * m + g * group_size + k] = v;
            picks.push((k, v));
        }
        let signal = (picks[0].0 < group_size / 2) ^ (picks[1].1 > 2.0);
        let flip = rng.random_bool(0.05);
        y.push(usize::from(signal ^ flip));
    }
    Dataset::from_rows(x, m, y, vec!["a".into(), "b".into()]).unwrap()
}
