use rand::Rng;

use super::params::GossConfig;

/// Rows kept for one tree.
///
/// `set_a` holds the rows with the largest |gradient|; `set_b` is a uniform
/// sample of the remainder whose gradients and hessians are multiplied by
/// `weight` to keep the split gain estimate unbiased. Both sets are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct GossSample {
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
    pub weight: f64,
}

impl GossSample {
    /// Every row, unit weight.
    pub fn all(n: usize) -> Self {
        GossSample {
            set_a: (0..n).collect(),
            set_b: Vec::new(),
            weight: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.set_a.len() + self.set_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(row, weight)` pairs in ascending row order.
    pub fn weighted_rows(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.len());
        let (mut a, mut b) = (self.set_a.iter().peekable(), self.set_b.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&ra), Some(&&rb)) if ra < rb => {
                    out.push((ra, 1.0));
                    a.next();
                }
                (_, Some(&&rb)) => {
                    out.push((rb, self.weight));
                    b.next();
                }
                (Some(&&ra), None) => {
                    out.push((ra, 1.0));
                    a.next();
                }
                (None, None) => break,
            }
        }
        out
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Gradient-based one-side sampling.
///
/// Keeps the `round(a·n)` rows of largest |g| (ties toward the lower index)
/// and draws `round(b·n)` of the remaining rows without replacement.
pub fn goss_sample<R: Rng + ?Sized>(gradients: &[f64], config: &GossConfig, rng: &mut R) -> GossSample {
    let n = gradients.len();
    let top = round_half_up(config.top_rate * n as f64).min(n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| gradients[j].abs().total_cmp(&gradients[i].abs()).then(i.cmp(&j)));
    let mut set_a = order[..top].to_vec();
    let mut rest = order[top..].to_vec();
    set_a.sort_unstable();
    rest.sort_unstable();

    let mut other = round_half_up(config.other_rate * n as f64);
    if other > rest.len() {
        log::debug!("GOSS other-rate sample of {other} clamped to the {} remaining rows", rest.len());
        other = rest.len();
    }
    let mut set_b: Vec<usize> = rand::seq::index::sample(rng, rest.len(), other)
        .into_iter()
        .map(|k| rest[k])
        .collect();
    set_b.sort_unstable();

    let weight = if set_b.is_empty() { 1.0 } else { config.amplification() };
    GossSample { set_a, set_b, weight }
}

/// The four index sets produced by thresholding one feature at `d` over a
/// GOSS sample: rows with value ≤ d go left.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPartition {
    pub a_left: Vec<usize>,
    pub a_right: Vec<usize>,
    pub b_left: Vec<usize>,
    pub b_right: Vec<usize>,
}

impl SplitPartition {
    pub fn from_threshold(sample: &GossSample, values: &[f64], d: f64) -> Self {
        let (a_left, a_right) = sample.set_a.iter().partition(|&&i| values[i] <= d);
        let (b_left, b_right) = sample.set_b.iter().partition(|&&i| values[i] <= d);
        SplitPartition {
            a_left,
            a_right,
            b_left,
            b_right,
        }
    }

    pub fn n_left(&self) -> usize {
        self.a_left.len() + self.b_left.len()
    }

    pub fn n_right(&self) -> usize {
        self.a_right.len() + self.b_right.len()
    }
}

/// Estimated variance gain of a split over `n` training rows:
///
/// `(1/n) · [ (ΣA_l g + w·ΣB_l g)² / n_l + (ΣA_r g + w·ΣB_r g)² / n_r ]`
///
/// with `w = (1 − a) / b` and `n_l`, `n_r` the unweighted sampled counts.
/// Returns `None` when either side is empty.
pub fn variance_gain(partition: &SplitPartition, gradients: &[f64], config: &GossConfig, n: usize) -> Option<f64> {
    let (n_left, n_right) = (partition.n_left(), partition.n_right());
    if n_left == 0 || n_right == 0 || n == 0 {
        return None;
    }
    let sum = |idx: &[usize]| idx.iter().map(|&i| gradients[i]).sum::<f64>();
    let w = config.amplification();
    let left = sum(&partition.a_left) + w * sum(&partition.b_left);
    let right = sum(&partition.a_right) + w * sum(&partition.b_right);
    Some(variance_gain_from_sums(left, n_left, right, n_right, n))
}

/// Same estimator from already-weighted gradient sums.
#[inline]
pub fn variance_gain_from_sums(left_sum: f64, n_left: usize, right_sum: f64, n_right: usize, n: usize) -> f64 {
    (left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64) / n as f64
}
