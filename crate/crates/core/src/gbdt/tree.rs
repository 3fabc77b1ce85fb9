//! Leaf-wise tree growth over bundled histograms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::BinnedDesign;
use super::efb::BundledDesign;
use super::goss::{variance_gain_from_sums, GossSample};
use super::params::{BoosterParams, LEAF_LAMBDA};
use crate::error::{Error, Result};

/// Splits whose improvement is below this fraction of `Σ(w·g)² / n` are
/// treated as rounding noise.
const MIN_RELATIVE_IMPROVEMENT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree stored as a node array rooted at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Output column of the raw score this tree adds to.
    pub class_index: usize,
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn constant(value: f64) -> Self {
        Tree {
            class_index: 0,
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        // children always follow their parent in the node array
        for (i, node) in self.nodes.iter().enumerate() {
            max = max.max(depth[i]);
            if let Node::Split { left, right, .. } = *node {
                depth[left] = depth[i] + 1;
                depth[right] = depth[i] + 1;
            }
        }
        max
    }

    pub(crate) fn scale_leaves(&mut self, factor: f64) {
        for node in &mut self.nodes {
            if let Node::Leaf { value } = node {
                *value *= factor;
            }
        }
    }

    /// Checks that the nodes form one binary tree rooted at 0 with children
    /// stored after their parent.
    pub fn validate(&self, feature_count: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::ModelLoad("tree has no nodes".into()));
        }
        let mut referenced = vec![false; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= feature_count {
                        return Err(Error::ModelLoad(format!(
                            "node {i} splits on feature {feature} but the model has {feature_count} features"
                        )));
                    }
                    if threshold.is_nan() {
                        return Err(Error::ModelLoad(format!("node {i} has a NaN threshold")));
                    }
                    for child in [left, right] {
                        if child <= i || child >= self.nodes.len() || referenced[child] {
                            return Err(Error::ModelLoad(format!("node {i} has invalid child {child}")));
                        }
                        referenced[child] = true;
                    }
                }
                Node::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(Error::ModelLoad(format!("leaf {i} has non-finite value")));
                    }
                }
            }
        }
        if let Some(orphan) = referenced.iter().skip(1).position(|&r| !r) {
            return Err(Error::ModelLoad(format!("node {} is unreachable", orphan + 1)));
        }
        Ok(())
    }
}

/// Binned training data shared by every tree of a booster.
#[derive(Debug, Clone, Copy)]
pub struct TreeContext<'a> {
    pub design: &'a BinnedDesign,
    pub bundled: &'a BundledDesign,
}

/// Best threshold found for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    /// Rows with bin ≤ `bin` go left.
    pub bin: usize,
    pub threshold: f64,
    /// Variance gain of the split.
    pub gain: f64,
    /// Gain minus the unsplit node's own term.
    pub improvement: f64,
    pub n_left: usize,
    pub n_right: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct HistBin {
    g: f64,
    n: u32,
}

struct Sampled {
    rows: Vec<usize>,
    wg: Vec<f64>,
}

fn build_histograms(ctx: &TreeContext, sampled: &Sampled, members: &[u32]) -> Vec<Vec<HistBin>> {
    (0..ctx.bundled.n_bundles())
        .into_par_iter()
        .map(|b| {
            let col = ctx.bundled.column(b);
            let mut hist = vec![HistBin::default(); ctx.bundled.bundles()[b].n_bins as usize];
            for &k in members {
                let k = k as usize;
                let bin = &mut hist[col[sampled.rows[k]] as usize];
                bin.g += sampled.wg[k];
                bin.n += 1;
            }
            hist
        })
        .collect()
}

struct NodeTotals {
    g: f64,
    n: usize,
    parent_gain: f64,
    floor: f64,
}

fn feature_best(
    ctx: &TreeContext,
    feature: usize,
    hists: &[Vec<HistBin>],
    totals: &NodeTotals,
    min_data: usize,
    n_total: usize,
) -> Option<SplitChoice> {
    let mapper = ctx.design.mapper(feature);
    let n_bins = mapper.n_bins();
    if n_bins < 2 {
        return None;
    }
    let (b, offset) = ctx.bundled.location(feature);
    let own = &hists[b][offset as usize..offset as usize + n_bins - 1];

    // bin 0 is whatever the non-default bins do not account for
    let (mut nd_g, mut nd_n) = (0.0, 0usize);
    for bin in own {
        nd_g += bin.g;
        nd_n += bin.n as usize;
    }
    let bin0 = (totals.g - nd_g, totals.n - nd_n);

    let mut best: Option<SplitChoice> = None;
    let (mut left_g, mut left_n) = (0.0, 0usize);
    for t in 0..n_bins - 1 {
        let (g, n) = if t == 0 { bin0 } else { (own[t - 1].g, own[t - 1].n as usize) };
        left_g += g;
        left_n += n;
        let right_n = totals.n - left_n;
        if left_n < min_data {
            continue;
        }
        if right_n < min_data {
            break;
        }
        let gain = variance_gain_from_sums(left_g, left_n, totals.g - left_g, right_n, n_total);
        let improvement = gain - totals.parent_gain;
        if best.is_none_or(|b| improvement > b.improvement) {
            best = Some(SplitChoice {
                feature,
                bin: t,
                threshold: mapper.threshold(t),
                gain,
                improvement,
                n_left: left_n,
                n_right: right_n,
            });
        }
    }
    best.filter(|b| b.improvement > totals.floor)
}

fn node_best(
    ctx: &TreeContext,
    sampled: &Sampled,
    members: &[u32],
    min_data: usize,
    n_total: usize,
) -> Option<SplitChoice> {
    if members.len() < 2 * min_data {
        return None;
    }
    let (mut g, mut sq) = (0.0, 0.0);
    for &k in members {
        let v = sampled.wg[k as usize];
        g += v;
        sq += v * v;
    }
    let n = members.len();
    let totals = NodeTotals {
        g,
        n,
        parent_gain: g * g / n as f64 / n_total as f64,
        floor: MIN_RELATIVE_IMPROVEMENT * sq / n_total as f64,
    };
    let hists = build_histograms(ctx, sampled, members);
    let per_feature: Vec<Option<SplitChoice>> = (0..ctx.design.n_features())
        .into_par_iter()
        .map(|f| feature_best(ctx, f, &hists, &totals, min_data, n_total))
        .collect();
    // fixed feature order keeps the result independent of worker count
    per_feature
        .into_iter()
        .flatten()
        .fold(None, |best: Option<SplitChoice>, c| match best {
            Some(b) if c.improvement <= b.improvement => Some(b),
            _ => Some(c),
        })
}

/// Best split over `rows` (ascending, with per-row weighted gradients `wg`),
/// scored by the GOSS variance gain over `n_total` training rows.
pub fn best_split(
    ctx: &TreeContext,
    rows: &[usize],
    wg: &[f64],
    min_data_in_leaf: usize,
    n_total: usize,
) -> Option<SplitChoice> {
    let sampled = Sampled {
        rows: rows.to_vec(),
        wg: wg.to_vec(),
    };
    let members: Vec<u32> = (0..rows.len() as u32).collect();
    node_best(ctx, &sampled, &members, min_data_in_leaf, n_total)
}

struct Leaf {
    node: usize,
    depth: usize,
    members: Vec<u32>,
    best: Option<SplitChoice>,
}

/// Grows one tree best-first: the leaf with the largest improvement is split
/// until `max_leaves` is reached or no leaf admits a split. Leaf values are
/// `−Σ(w·g) / (Σ(w·h) + λ)`, not yet shrunk by the learning rate.
pub fn grow_tree(
    ctx: &TreeContext,
    gradients: &[f64],
    hessians: &[f64],
    sample: &GossSample,
    params: &BoosterParams,
) -> Tree {
    let n_total = ctx.design.n_rows();
    let weighted = sample.weighted_rows();
    let sampled = Sampled {
        rows: weighted.iter().map(|&(r, _)| r).collect(),
        wg: weighted.iter().map(|&(r, w)| w * gradients[r]).collect(),
    };
    let wh: Vec<f64> = weighted.iter().map(|&(r, w)| w * hessians[r]).collect();

    let find = |members: &[u32], depth: usize| {
        if depth >= params.max_depth {
            None
        } else {
            node_best(ctx, &sampled, members, params.min_data_in_leaf, n_total)
        }
    };

    let root: Vec<u32> = (0..sampled.rows.len() as u32).collect();
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut leaves = vec![Leaf {
        node: 0,
        depth: 0,
        best: find(&root, 0),
        members: root,
    }];

    while leaves.len() < params.max_leaves {
        let mut pick: Option<usize> = None;
        for (i, leaf) in leaves.iter().enumerate() {
            let Some(b) = leaf.best else { continue };
            let better = match pick {
                None => true,
                Some(p) => {
                    let cur = leaves[p].best.unwrap().improvement;
                    b.improvement > cur || (b.improvement == cur && leaf.node < leaves[p].node)
                }
            };
            if better {
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };

        let leaf = leaves.swap_remove(i);
        let split = leaf.best.unwrap();
        let n_bins = ctx.design.mapper(split.feature).n_bins();
        let (left, right): (Vec<u32>, Vec<u32>) = leaf.members.iter().partition(|&&k| {
            ctx.bundled.decode(split.feature, n_bins, sampled.rows[k as usize]) as usize <= split.bin
        });

        let (l, r) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[leaf.node] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        let depth = leaf.depth + 1;
        for (node, members) in [(l, left), (r, right)] {
            leaves.push(Leaf {
                node,
                depth,
                best: find(&members, depth),
                members,
            });
        }
    }

    for leaf in &leaves {
        let (mut g, mut h) = (0.0, 0.0);
        for &k in &leaf.members {
            g += sampled.wg[k as usize];
            h += wh[k as usize];
        }
        nodes[leaf.node] = Node::Leaf {
            value: -g / (h + LEAF_LAMBDA),
        };
    }
    Tree { class_index: 0, nodes }
}
