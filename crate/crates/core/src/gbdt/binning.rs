use crate::error::{Error, Result};
use crate::feature_store::Dataset;

/// Maps raw values of one feature to histogram bins.
///
/// Bin `t` holds values in `(uppers[t-1], uppers[t]]`; the last bin is open
/// above. Splitting "bin ≤ t" is therefore the raw test `x ≤ uppers[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinMapper {
    uppers: Vec<f64>,
}

impl BinMapper {
    /// Quantile boundaries over the sorted values of one column.
    ///
    /// With at most `max_bins` distinct values every value gets its own bin.
    pub fn from_values(values: &[f64], max_bins: usize) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = sorted.clone();
        distinct.dedup();

        if distinct.len() <= max_bins {
            distinct.pop();
            return BinMapper { uppers: distinct };
        }

        let n = sorted.len();
        let max = *distinct.last().unwrap();
        let mut uppers: Vec<f64> = Vec::with_capacity(max_bins - 1);
        for b in 1..max_bins {
            // round(b·n / max_bins)
            let idx = (2 * b * n + max_bins) / (2 * max_bins);
            if idx == 0 {
                continue;
            }
            let cut = sorted[idx - 1];
            if cut < max && uppers.last().is_none_or(|&last| cut > last) {
                uppers.push(cut);
            }
        }
        BinMapper { uppers }
    }

    pub fn n_bins(&self) -> usize {
        self.uppers.len() + 1
    }

    pub fn bin(&self, value: f64) -> u8 {
        self.uppers.partition_point(|&u| u < value) as u8
    }

    /// Raw threshold for the split "bin ≤ t".
    pub fn threshold(&self, t: usize) -> f64 {
        self.uppers[t]
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.uppers
    }
}

/// Per-feature bin mappers plus the binned value of every cell, stored
/// column-major.
#[derive(Debug, Clone)]
pub struct BinnedDesign {
    mappers: Vec<BinMapper>,
    columns: Vec<Vec<u8>>,
    n_rows: usize,
}

impl BinnedDesign {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.mappers.len()
    }

    pub fn mapper(&self, feature: usize) -> &BinMapper {
        &self.mappers[feature]
    }

    pub fn column(&self, feature: usize) -> &[u8] {
        &self.columns[feature]
    }
}

pub fn bin_features(dataset: &Dataset, max_bins: usize) -> Result<BinnedDesign> {
    if !(2..=256).contains(&max_bins) {
        return Err(Error::Parameter(format!("max_bins must lie in [2, 256], got {max_bins}")));
    }
    let (mappers, columns) = (0..dataset.n_features())
        .map(|j| {
            let values = dataset.column(j);
            let mapper = BinMapper::from_values(&values, max_bins);
            let column = values.iter().map(|&v| mapper.bin(v)).collect();
            (mapper, column)
        })
        .unzip();
    Ok(BinnedDesign {
        mappers,
        columns,
        n_rows: dataset.n_rows(),
    })
}
