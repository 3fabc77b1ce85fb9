//! Exclusive feature bundling.
//!
//! Features that are rarely non-default (bin 0) on the same row are packed
//! into one bundle column. Member `f` with `n_f` bins occupies bundle bins
//! `offset_f .. offset_f + n_f − 1`; bundle bin 0 means every member is at its
//! default bin.

use super::binning::BinnedDesign;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureBundle {
    pub features: Vec<usize>,
    /// Bundle bin holding member bin 1, per member.
    pub offsets: Vec<u32>,
    pub n_bins: u32,
}

impl FeatureBundle {
    fn new() -> Self {
        FeatureBundle {
            features: Vec::new(),
            offsets: Vec::new(),
            n_bins: 1,
        }
    }

    fn push(&mut self, feature: usize, feature_bins: usize) {
        self.features.push(feature);
        self.offsets.push(self.n_bins);
        self.n_bins += feature_bins as u32 - 1;
    }
}

/// Greedy bundling: features in descending order of non-default count (ties
/// toward the lower index) join the first bundle whose accumulated conflict
/// count stays within `max_conflict`, else open a new bundle.
pub fn efb_bundle(design: &BinnedDesign, max_conflict: usize) -> Vec<FeatureBundle> {
    let n = design.n_rows();
    let nonzero_rows: Vec<Vec<usize>> = (0..design.n_features())
        .map(|f| {
            design
                .column(f)
                .iter()
                .enumerate()
                .filter(|(_, &b)| b != 0)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let mut order: Vec<usize> = (0..design.n_features()).collect();
    order.sort_by(|&a, &b| nonzero_rows[b].len().cmp(&nonzero_rows[a].len()).then(a.cmp(&b)));

    struct Building {
        bundle: FeatureBundle,
        occupied: Vec<bool>,
        conflicts: usize,
    }
    let mut building: Vec<Building> = Vec::new();

    for f in order {
        let rows = &nonzero_rows[f];
        let mut placed = false;
        for b in building.iter_mut() {
            let budget = max_conflict - b.conflicts;
            let mut hits = 0;
            for &i in rows {
                if b.occupied[i] {
                    hits += 1;
                    if hits > budget {
                        break;
                    }
                }
            }
            if hits <= budget {
                b.conflicts += hits;
                for &i in rows {
                    b.occupied[i] = true;
                }
                b.bundle.push(f, design.mapper(f).n_bins());
                placed = true;
                break;
            }
        }
        if !placed {
            let mut bundle = FeatureBundle::new();
            bundle.push(f, design.mapper(f).n_bins());
            let mut occupied = vec![false; n];
            for &i in rows {
                occupied[i] = true;
            }
            building.push(Building {
                bundle,
                occupied,
                conflicts: 0,
            });
        }
    }
    building.into_iter().map(|b| b.bundle).collect()
}

/// One bundle per feature, in feature order.
pub fn singleton_bundles(design: &BinnedDesign) -> Vec<FeatureBundle> {
    (0..design.n_features())
        .map(|f| {
            let mut b = FeatureBundle::new();
            b.push(f, design.mapper(f).n_bins());
            b
        })
        .collect()
}

/// Bundle columns plus, for every original feature, its bundle and offset.
#[derive(Debug, Clone)]
pub struct BundledDesign {
    bundles: Vec<FeatureBundle>,
    columns: Vec<Vec<u32>>,
    location: Vec<(usize, u32)>,
}

impl BundledDesign {
    /// Encodes each row as one bin per bundle. On a conflicting row the member
    /// listed first keeps its value.
    pub fn encode(design: &BinnedDesign, bundles: Vec<FeatureBundle>) -> Self {
        let n = design.n_rows();
        let mut location = vec![(0, 0); design.n_features()];
        let columns = bundles
            .iter()
            .enumerate()
            .map(|(bi, bundle)| {
                let mut col = vec![0u32; n];
                for (&f, &offset) in bundle.features.iter().zip(&bundle.offsets) {
                    location[f] = (bi, offset);
                    for (cell, &bin) in col.iter_mut().zip(design.column(f)) {
                        if bin != 0 && *cell == 0 {
                            *cell = offset + bin as u32 - 1;
                        }
                    }
                }
                col
            })
            .collect();
        BundledDesign {
            bundles,
            columns,
            location,
        }
    }

    pub fn bundles(&self) -> &[FeatureBundle] {
        &self.bundles
    }

    pub fn n_bundles(&self) -> usize {
        self.bundles.len()
    }

    pub fn column(&self, bundle: usize) -> &[u32] {
        &self.columns[bundle]
    }

    /// `(bundle index, offset)` of an original feature.
    pub fn location(&self, feature: usize) -> (usize, u32) {
        self.location[feature]
    }

    /// Recovers a feature's own bin from its bundle column.
    pub fn decode(&self, feature: usize, feature_bins: usize, row: usize) -> u8 {
        let (b, offset) = self.location[feature];
        let v = self.columns[b][row];
        if v >= offset && v < offset + feature_bins as u32 - 1 {
            (v - offset + 1) as u8
        } else {
            0
        }
    }
}
