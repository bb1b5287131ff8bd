//! Random forest of classification trees: bootstrap resampling, Gini-impurity
//! splits over per-node random feature subsets, probability prediction by
//! averaged leaf proportions, and k-fold cross-validated choice of the
//! feature-subset size.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureName, FeatureRow};

pub const DEFAULT_NTREE: usize = 400;
pub const DEFAULT_MIN_NODE: usize = 5;

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("mtry {mtry} out of range 1..={p}")]
    InvalidMtry { mtry: usize, p: usize },
    #[error("row is missing feature `{0}`")]
    MissingFeature(FeatureName),
    #[error("rows have inconsistent feature sets")]
    InconsistentRows,
    #[error("{0}")]
    Config(String),
}

/// A node of a fitted classification tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: FeatureName,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        n0: u32,
        n1: u32,
    },
}

impl TreeNode {
    /// Class-1 proportion of the leaf this point falls into.
    pub fn leaf_proportion(&self, values: &[f64], features: &[FeatureName]) -> f64 {
        match self {
            TreeNode::Leaf { n0, n1 } => *n1 as f64 / (*n0 + *n1) as f64,
            TreeNode::Split { feature, threshold, left, right } => {
                let idx = features.iter().position(|f| f == feature).expect("known feature");
                if values[idx] <= *threshold {
                    left.leaf_proportion(values, features)
                } else {
                    right.leaf_proportion(values, features)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ForestConfig {
    pub ntree: usize,
    pub min_node: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { ntree: DEFAULT_NTREE, min_node: DEFAULT_MIN_NODE, seed: 0 }
    }
}

/// A fitted forest. Trees are independent; per-tree RNG streams derive from
/// `(seed, tree index)` so serial and parallel fits agree bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub features: Vec<FeatureName>,
    pub mtry: usize,
    pub ntree: usize,
    pub min_node: usize,
    pub seed: u64,
}

struct TrainingData {
    features: Vec<FeatureName>,
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

fn prepare(rows: &[FeatureRow]) -> Result<TrainingData, ForestError> {
    if rows.len() < 2 {
        return Err(ForestError::TooFewRows(rows.len()));
    }
    let features: Vec<FeatureName> = rows[0].values.keys().copied().collect();
    let mut data = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for row in rows {
        if row.values.len() != features.len() {
            return Err(ForestError::InconsistentRows);
        }
        let mut vals = Vec::with_capacity(features.len());
        for f in &features {
            vals.push(*row.values.get(f).ok_or(ForestError::InconsistentRows)?);
        }
        data.push(vals);
        labels.push(row.label);
    }
    Ok(TrainingData { features, rows: data, labels })
}

fn gini(n0: f64, n1: f64) -> f64 {
    let n = n0 + n1;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = n0 / n;
    let p1 = n1 / n;
    1.0 - p0 * p0 - p1 * p1
}

struct BestSplit {
    feature_idx: usize,
    threshold: f64,
    gain: f64,
}

fn find_best_split(
    data: &TrainingData,
    indices: &[usize],
    candidate_features: &[usize],
) -> Option<BestSplit> {
    let n = indices.len() as f64;
    let n1_total: f64 = indices.iter().map(|&i| data.labels[i] as f64).sum();
    let n0_total = n - n1_total;
    let parent = gini(n0_total, n1_total);

    let mut best: Option<BestSplit> = None;
    let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(indices.len());
    for &fi in candidate_features {
        pairs.clear();
        pairs.extend(indices.iter().map(|&i| (data.rows[i][fi], data.labels[i])));
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut left0 = 0.0;
        let mut left1 = 0.0;
        for w in 0..pairs.len() - 1 {
            if pairs[w].1 == 1 {
                left1 += 1.0;
            } else {
                left0 += 1.0;
            }
            if pairs[w].0 == pairs[w + 1].0 {
                continue;
            }
            let right0 = n0_total - left0;
            let right1 = n1_total - left1;
            let nl = left0 + left1;
            let nr = right0 + right1;
            let gain = parent - (nl / n) * gini(left0, left1) - (nr / n) * gini(right0, right1);
            if gain > best.as_ref().map_or(1e-12, |b| b.gain) {
                best = Some(BestSplit {
                    feature_idx: fi,
                    // Midpoint between adjacent distinct sorted values.
                    threshold: 0.5 * (pairs[w].0 + pairs[w + 1].0),
                    gain,
                });
            }
        }
    }
    best
}

fn grow_tree(
    data: &TrainingData,
    indices: &[usize],
    mtry: usize,
    min_node: usize,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    let n1: u32 = indices.iter().map(|&i| u32::from(data.labels[i])).sum();
    let n0 = indices.len() as u32 - n1;
    if n0 == 0 || n1 == 0 || indices.len() < min_node {
        return TreeNode::Leaf { n0, n1 };
    }

    let p = data.features.len();
    let mut feature_pool: Vec<usize> = (0..p).collect();
    feature_pool.shuffle(rng);
    feature_pool.truncate(mtry);
    feature_pool.sort_unstable(); // deterministic candidate order

    match find_best_split(data, indices, &feature_pool) {
        None => TreeNode::Leaf { n0, n1 },
        Some(split) => {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .partition(|&&i| data.rows[i][split.feature_idx] <= split.threshold);
            TreeNode::Split {
                feature: data.features[split.feature_idx],
                threshold: split.threshold,
                left: Box::new(grow_tree(data, &left_idx, mtry, min_node, rng)),
                right: Box::new(grow_tree(data, &right_idx, mtry, min_node, rng)),
            }
        }
    }
}

pub(crate) fn stream_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 over seed + index; decorrelates per-tree streams.
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Grow one tree on the given sample with an explicit RNG.
pub fn fit_tree(rows: &[FeatureRow], mtry: usize, min_node: usize, rng: &mut ChaCha8Rng) -> Result<TreeNode, ForestError> {
    let data = prepare(rows)?;
    let p = data.features.len();
    if mtry == 0 || mtry > p {
        return Err(ForestError::InvalidMtry { mtry, p });
    }
    let indices: Vec<usize> = (0..rows.len()).collect();
    Ok(grow_tree(&data, &indices, mtry, min_node, rng))
}

/// Fit `ntree` trees, each on an n-out-of-n bootstrap resample.
pub fn fit_forest(rows: &[FeatureRow], mtry: usize, config: &ForestConfig) -> Result<ForestModel, ForestError> {
    let data = prepare(rows)?;
    let p = data.features.len();
    if mtry == 0 || mtry > p {
        return Err(ForestError::InvalidMtry { mtry, p });
    }
    let n = rows.len();
    let trees: Vec<TreeNode> = (0..config.ntree)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, t as u64));
            let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            grow_tree(&data, &sample, mtry, config.min_node, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        trees,
        features: data.features,
        mtry,
        ntree: config.ntree,
        min_node: config.min_node,
        seed: config.seed,
    })
}

impl ForestModel {
    /// Mean leaf class-1 proportion across trees.
    pub fn predict_prob(&self, row: &FeatureRow) -> Result<f64, ForestError> {
        let mut values = Vec::with_capacity(self.features.len());
        for f in &self.features {
            values.push(*row.values.get(f).ok_or(ForestError::MissingFeature(*f))?);
        }
        let sum: f64 = self
            .trees
            .iter()
            .map(|t| t.leaf_proportion(&values, &self.features))
            .sum();
        Ok(sum / self.trees.len() as f64)
    }
}

/// Choose `mtry` by stratified k-fold cross-validated classification rate.
/// Ties break toward the smaller candidate.
pub fn tune_mtry(
    rows: &[FeatureRow],
    candidates: &[usize],
    k: usize,
    config: &ForestConfig,
) -> Result<usize, ForestError> {
    if k < 2 {
        return Err(ForestError::Config(format!("need k >= 2 folds, got {k}")));
    }
    if rows.len() < k {
        return Err(ForestError::Config(format!(
            "fewer rows ({}) than folds ({k})",
            rows.len()
        )));
    }
    if candidates.is_empty() {
        return Err(ForestError::Config("empty mtry candidate set".into()));
    }
    let p = rows[0].values.len();
    for &c in candidates {
        if c == 0 || c > p {
            return Err(ForestError::InvalidMtry { mtry: c, p });
        }
    }

    // Stratified folds: shuffle each class, deal round-robin.
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, u64::MAX));
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for label in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label == label).collect();
        idx.shuffle(&mut rng);
        for (j, i) in idx.into_iter().enumerate() {
            folds[j % k].push(i);
        }
    }

    let mut best: Option<(usize, f64)> = None;
    for &cand in candidates {
        let mut correct = 0usize;
        let mut total = 0usize;
        for (fold_idx, fold) in folds.iter().enumerate() {
            if fold.is_empty() {
                continue;
            }
            let train: Vec<FeatureRow> = (0..k)
                .filter(|&j| j != fold_idx)
                .flat_map(|j| folds[j].iter().map(|&i| rows[i].clone()))
                .collect();
            let fold_config = ForestConfig {
                seed: stream_seed(config.seed, (cand * 1000 + fold_idx) as u64),
                ..*config
            };
            let model = fit_forest(&train, cand, &fold_config)?;
            for &i in fold {
                let prob = model.predict_prob(&rows[i])?;
                let pred = u8::from(prob > 0.5);
                if pred == rows[i].label {
                    correct += 1;
                }
                total += 1;
            }
        }
        let rate = correct as f64 / total as f64;
        match best {
            Some((_, best_rate)) if rate <= best_rate => {}
            _ => best = Some((cand, rate)),
        }
    }
    // First candidate wins ties because later ones only replace on a strict
    // improvement; callers pass candidates in increasing order.
    Ok(best.unwrap().0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn row(values: &[(FeatureName, f64)], label: u8) -> FeatureRow {
        FeatureRow {
            values: values.iter().copied().collect::<BTreeMap<_, _>>(),
            label,
        }
    }

    fn xor_free_rows(n: usize, seed: u64) -> Vec<FeatureRow> {
        // Separable-ish 2-D data with some noise.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let a: f64 = rng.gen_range(-1.0..1.0);
                let b: f64 = rng.gen_range(-1.0..1.0);
                let p = crate::sigmoid(3.0 * a - 2.0 * b);
                row(&[(FeatureName::Elo, a), (FeatureName::Rank, b)], u8::from(rng.gen_bool(p)))
            })
            .collect()
    }

    #[test]
    fn pure_sample_is_single_leaf() {
        let rows: Vec<FeatureRow> = (0..10).map(|i| row(&[(FeatureName::Elo, i as f64)], 1)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = fit_tree(&rows, 1, 5, &mut rng).unwrap();
        assert_eq!(tree, TreeNode::Leaf { n0: 0, n1: 10 });
    }

    #[test]
    fn perfect_separator_single_split() {
        let mut rows = Vec::new();
        for _ in 0..10 {
            rows.push(row(&[(FeatureName::Elo, 0.0)], 0));
            rows.push(row(&[(FeatureName::Elo, 1.0)], 1));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = fit_tree(&rows, 1, 5, &mut rng).unwrap();
        match tree {
            TreeNode::Split { threshold, left, right, .. } => {
                assert!(threshold > 0.0 && threshold < 1.0);
                assert_eq!(*left, TreeNode::Leaf { n0: 10, n1: 0 });
                assert_eq!(*right, TreeNode::Leaf { n0: 0, n1: 10 });
            }
            leaf => panic!("expected split, got {leaf:?}"),
        }
    }

    #[test]
    fn tree_deterministic_for_fixed_rng() {
        let rows = xor_free_rows(200, 3);
        let t1 = fit_tree(&rows, 2, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let t2 = fit_tree(&rows, 2, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn forest_deterministic_for_fixed_seed() {
        let rows = xor_free_rows(300, 5);
        let config = ForestConfig { ntree: 50, seed: 42, ..Default::default() };
        let f1 = fit_forest(&rows, 2, &config).unwrap();
        let f2 = fit_forest(&rows, 2, &config).unwrap();
        for r in &rows {
            assert_eq!(f1.predict_prob(r).unwrap(), f2.predict_prob(r).unwrap());
        }
        assert_eq!(f1.trees, f2.trees);
    }

    #[test]
    fn single_class_degenerates_to_constant() {
        let rows: Vec<FeatureRow> = (0..20).map(|i| row(&[(FeatureName::Elo, i as f64)], 1)).collect();
        let config = ForestConfig { ntree: 10, seed: 0, ..Default::default() };
        let forest = fit_forest(&rows, 1, &config).unwrap();
        assert_eq!(forest.predict_prob(&rows[0]).unwrap(), 1.0);
    }

    #[test]
    fn mean_leaf_proportion() {
        let forest = ForestModel {
            trees: vec![TreeNode::Leaf { n0: 8, n1: 2 }, TreeNode::Leaf { n0: 2, n1: 8 }],
            features: vec![FeatureName::Elo],
            mtry: 1,
            ntree: 2,
            min_node: 5,
            seed: 0,
        };
        let r = row(&[(FeatureName::Elo, 0.0)], 0);
        assert_eq!(forest.predict_prob(&r).unwrap(), 0.5);
    }

    #[test]
    fn probability_in_unit_interval() {
        let rows = xor_free_rows(200, 8);
        let config = ForestConfig { ntree: 30, seed: 3, ..Default::default() };
        let forest = fit_forest(&rows, 2, &config).unwrap();
        for r in &rows {
            let p = forest.predict_prob(r).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn forest_beats_majority_on_bootstrap() {
        // Each tree must fit its own bootstrap sample at least as well as the
        // constant majority-class predictor.
        let rows = xor_free_rows(300, 13);
        let config = ForestConfig { ntree: 20, seed: 7, ..Default::default() };
        let data_features: Vec<FeatureName> = rows[0].values.keys().copied().collect();
        let forest = fit_forest(&rows, 2, &config).unwrap();
        for t in 0..config.ntree {
            // Re-derive the exact bootstrap sample tree t was grown on.
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, t as u64));
            let sample: Vec<usize> = (0..rows.len()).map(|_| rng.gen_range(0..rows.len())).collect();
            let sample_rows: Vec<FeatureRow> = sample.iter().map(|&i| rows[i].clone()).collect();
            let tree = &forest.trees[t];
            let n1 = sample_rows.iter().filter(|r| r.label == 1).count();
            let majority = n1.max(sample_rows.len() - n1) as f64 / sample_rows.len() as f64;
            let correct = sample_rows
                .iter()
                .filter(|r| {
                    let vals: Vec<f64> = data_features.iter().map(|f| r.values[f]).collect();
                    u8::from(tree.leaf_proportion(&vals, &data_features) > 0.5) == r.label
                })
                .count() as f64
                / sample_rows.len() as f64;
            assert!(correct + 1e-12 >= majority, "tree {t}: {correct} < {majority}");
        }
    }

    #[test]
    fn duplicating_data_preserves_split() {
        let rows = xor_free_rows(100, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t1 = fit_tree(&rows, 2, 5, &mut rng).unwrap();
        let doubled: Vec<FeatureRow> = rows.iter().chain(rows.iter()).cloned().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t2 = fit_tree(&doubled, 2, 10, &mut rng).unwrap();
        match (&t1, &t2) {
            (
                TreeNode::Split { feature: f1, threshold: th1, .. },
                TreeNode::Split { feature: f2, threshold: th2, .. },
            ) => {
                assert_eq!(f1, f2);
                assert!((th1 - th2).abs() < 1e-12);
            }
            other => panic!("expected splits, got {other:?}"),
        }
    }

    #[test]
    fn tune_mtry_basics() {
        let rows = xor_free_rows(120, 2);
        let config = ForestConfig { ntree: 20, seed: 5, ..Default::default() };
        assert_eq!(tune_mtry(&rows, &[2], 5, &config).unwrap(), 2);
        let one_feature: Vec<FeatureRow> = rows
            .iter()
            .map(|r| row(&[(FeatureName::Elo, r.values[&FeatureName::Elo])], r.label))
            .collect();
        assert_eq!(tune_mtry(&one_feature, &[1], 5, &config).unwrap(), 1);
        assert!(tune_mtry(&rows[..3], &[1, 2], 10, &config).is_err());
        assert!(tune_mtry(&rows, &[], 5, &config).is_err());
        assert!(tune_mtry(&rows, &[3], 5, &config).is_err());
    }

    #[test]
    fn json_round_trip() {
        let rows = xor_free_rows(100, 6);
        let config = ForestConfig { ntree: 5, seed: 1, ..Default::default() };
        let forest = fit_forest(&rows, 1, &config).unwrap();
        let json = serde_json::to_string(&forest).unwrap();
        let forest2: ForestModel = serde_json::from_str(&json).unwrap();
        for r in &rows {
            assert_eq!(forest.predict_prob(r).unwrap(), forest2.predict_prob(r).unwrap());
        }
    }
}
