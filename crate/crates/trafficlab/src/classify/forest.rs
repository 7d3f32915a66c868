//! Tree ensembles: extremely randomized trees and random forest.
//!
//! Extra trees grow on the full training set and draw ONE uniform random cut
//! per candidate feature, keeping the cut with the best Gini decrease; random
//! forest bootstraps per tree and searches candidate features exhaustively.
//! Tree `t` consumes only the stream derived from `(seed, t)`, so trees can
//! be built in parallel and extending `n_trees` never changes earlier trees.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::par;
use crate::rng::derive_rng;

use super::{ClassifyError, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    ExtraTrees,
    RandomForest,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::ExtraTrees => "extra_trees",
            EnsembleKind::RandomForest => "random_forest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "extra_trees" => Some(EnsembleKind::ExtraTrees),
            "random_forest" => Some(EnsembleKind::RandomForest),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleParams {
    pub kind: EnsembleKind,
    pub n_trees: usize,
    /// Candidate features per node; defaults to ceil(sqrt(n_columns)).
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl EnsembleParams {
    pub fn new(kind: EnsembleKind, seed: u64) -> Self {
        EnsembleParams {
            kind,
            n_trees: 100,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
            seed,
        }
    }

    fn features_per_node(&self, n_columns: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (n_columns as f64).sqrt().ceil() as usize)
            .clamp(1, n_columns)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        fraction: f64,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    fn score(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { fraction, .. } => return *fraction,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] < *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreeEnsembleModel {
    pub params: EnsembleParams,
    pub column_manifest: Vec<String>,
    pub trees: Vec<Tree>,
}

pub fn train_ensemble(
    data: Dataset<'_>,
    column_manifest: &[String],
    params: &EnsembleParams,
) -> Result<TreeEnsembleModel, ClassifyError> {
    if data.n_rows() == 0 {
        return Err(ClassifyError::EmptyTable);
    }
    assert_eq!(
        data.width,
        column_manifest.len(),
        "manifest must match table width"
    );
    assert!(params.n_trees >= 1, "n_trees must be at least 1");
    assert!(params.min_samples_split >= 2, "min_samples_split < 2");
    let trees = par::map_indexed(params.n_trees, |t| build_tree(data, params, t as u64));
    Ok(TreeEnsembleModel {
        params: params.clone(),
        column_manifest: column_manifest.to_vec(),
        trees,
    })
}

/// Mean over trees of the leaf class-1 fraction, per row.
pub fn predict_proba(
    model: &TreeEnsembleModel,
    data: Dataset<'_>,
) -> Result<Vec<f64>, ClassifyError> {
    if data.width != model.column_manifest.len() {
        return Err(ClassifyError::ColumnMismatch {
            expected: model.column_manifest.len(),
            got: data.width,
        });
    }
    let inv = 1.0 / model.trees.len() as f64;
    Ok(par::map_indexed(data.n_rows(), |i| {
        let row = data.row(i);
        model.trees.iter().map(|t| t.score(row)).sum::<f64>() * inv
    }))
}

fn build_tree(data: Dataset<'_>, params: &EnsembleParams, tree_index: u64) -> Tree {
    let mut rng = derive_rng(params.seed, "tree", &[tree_index]);
    let mut samples: Vec<u32> = match params.kind {
        // Extra trees learn on the full training set.
        EnsembleKind::ExtraTrees => (0..data.n_rows() as u32).collect(),
        // Random forest bootstraps with replacement.
        EnsembleKind::RandomForest => {
            let n = data.n_rows();
            (0..n).map(|_| rng.gen_range(0..n) as u32).collect()
        }
    };
    let n = samples.len();
    let mut builder = TreeBuilder {
        data,
        params,
        n_features: params.features_per_node(data.width),
        nodes: Vec::new(),
        feature_pool: (0..data.width).collect(),
        scratch: Vec::new(),
        part_scratch: Vec::new(),
    };
    builder.grow(&mut rng, &mut samples, 0, n);
    Tree {
        nodes: builder.nodes,
    }
}

struct TreeBuilder<'a, 'p> {
    data: Dataset<'a>,
    params: &'p EnsembleParams,
    n_features: usize,
    nodes: Vec<TreeNode>,
    feature_pool: Vec<usize>,
    scratch: Vec<(f64, u8)>,
    part_scratch: Vec<u32>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

fn gini(ones: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = ones / total;
    2.0 * p * (1.0 - p)
}

impl TreeBuilder<'_, '_> {
    /// Grow the tree over `samples[lo..hi]` with an explicit work stack
    /// (trees can outgrow thread stacks). Nodes are visited in the same
    /// left-first pre-order a recursive build would use, so the random
    /// stream consumption is identical.
    fn grow(&mut self, rng: &mut ChaCha8Rng, samples: &mut [u32], lo: usize, hi: usize) {
        let root = self.push(TreeNode::Leaf {
            fraction: 0.0,
            count: 0,
        });
        let mut work = vec![(lo, hi, 0usize, root)];
        while let Some((lo, hi, depth, slot)) = work.pop() {
            let count = hi - lo;
            let ones = samples[lo..hi]
                .iter()
                .filter(|&&s| self.data.labels[s as usize] == 1)
                .count();
            let fraction = ones as f64 / count as f64;
            let depth_capped = self.params.max_depth.is_some_and(|cap| depth >= cap);
            let leaf = TreeNode::Leaf { fraction, count };
            if ones == 0 || ones == count || count < self.params.min_samples_split || depth_capped
            {
                self.nodes[slot as usize] = leaf;
                continue;
            }
            let best = match self.params.kind {
                EnsembleKind::ExtraTrees => self.best_random_split(rng, samples, lo, hi, ones),
                EnsembleKind::RandomForest => self.best_exhaustive_split(rng, samples, lo, hi, ones),
            };
            let Some(split) = best else {
                // Every candidate feature was constant across the node.
                self.nodes[slot as usize] = leaf;
                continue;
            };
            let mid = self.partition(samples, lo, hi, split.feature, split.threshold);
            debug_assert!(mid > lo && mid < hi, "split must separate samples");
            let left = self.push(TreeNode::Leaf {
                fraction: 0.0,
                count: 0,
            });
            let right = self.push(TreeNode::Leaf {
                fraction: 0.0,
                count: 0,
            });
            self.nodes[slot as usize] = TreeNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            work.push((mid, hi, depth + 1, right));
            work.push((lo, mid, depth + 1, left));
        }
    }

    fn push(&mut self, node: TreeNode) -> u32 {
        self.nodes.push(node);
        (self.nodes.len() - 1) as u32
    }

    /// Order-stable in-place partition: rows with `value < threshold` first.
    fn partition(
        &mut self,
        samples: &mut [u32],
        lo: usize,
        hi: usize,
        feature: usize,
        threshold: f64,
    ) -> usize {
        self.part_scratch.clear();
        let mut write = lo;
        for read in lo..hi {
            let s = samples[read];
            if self.data.row(s as usize)[feature] < threshold {
                samples[write] = s;
                write += 1;
            } else {
                self.part_scratch.push(s);
            }
        }
        samples[write..hi].copy_from_slice(&self.part_scratch);
        write
    }

    /// Draw the candidate features for this node without replacement.
    fn draw_features(&mut self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let w = self.data.width;
        for k in 0..self.n_features {
            let pick = rng.gen_range(k..w);
            self.feature_pool.swap(k, pick);
        }
        self.feature_pool[..self.n_features].to_vec()
    }

    /// Extra-trees rule: one uniform cut in (min, max) per candidate feature.
    fn best_random_split(
        &mut self,
        rng: &mut ChaCha8Rng,
        samples: &[u32],
        lo: usize,
        hi: usize,
        ones: usize,
    ) -> Option<BestSplit> {
        let count = (hi - lo) as f64;
        let parent = gini(ones as f64, count);
        let mut best: Option<BestSplit> = None;
        for feature in self.draw_features(rng) {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for &s in &samples[lo..hi] {
                let v = self.data.row(s as usize)[feature];
                min = min.min(v);
                max = max.max(v);
            }
            if !(max > min) {
                continue;
            }
            let threshold = min + rng.gen::<f64>() * (max - min);
            if threshold <= min || threshold > max {
                continue;
            }
            let mut left_n = 0.0;
            let mut left_ones = 0.0;
            for &s in &samples[lo..hi] {
                if self.data.row(s as usize)[feature] < threshold {
                    left_n += 1.0;
                    left_ones += f64::from(self.data.labels[s as usize]);
                }
            }
            let right_n = count - left_n;
            if left_n == 0.0 || right_n == 0.0 {
                continue;
            }
            let right_ones = ones as f64 - left_ones;
            let decrease = parent
                - (left_n / count) * gini(left_ones, left_n)
                - (right_n / count) * gini(right_ones, right_n);
            if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
        best
    }

    /// Random-forest rule: scan every boundary between distinct sorted
    /// values of each candidate feature.
    fn best_exhaustive_split(
        &mut self,
        rng: &mut ChaCha8Rng,
        samples: &[u32],
        lo: usize,
        hi: usize,
        ones: usize,
    ) -> Option<BestSplit> {
        let count = (hi - lo) as f64;
        let parent = gini(ones as f64, count);
        let mut best: Option<BestSplit> = None;
        for feature in self.draw_features(rng) {
            self.scratch.clear();
            for &s in &samples[lo..hi] {
                self.scratch
                    .push((self.data.row(s as usize)[feature], self.data.labels[s as usize]));
            }
            self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_n = 0.0;
            let mut left_ones = 0.0;
            for i in 0..self.scratch.len() - 1 {
                left_n += 1.0;
                left_ones += f64::from(self.scratch[i].1);
                let (v, next) = (self.scratch[i].0, self.scratch[i + 1].0);
                if v == next {
                    continue;
                }
                let threshold = v + (next - v) / 2.0;
                // Midpoint can round down onto v; route such ties right.
                let threshold = if threshold > v { threshold } else { next };
                let right_n = count - left_n;
                let right_ones = ones as f64 - left_ones;
                let decrease = parent
                    - (left_n / count) * gini(left_ones, left_n)
                    - (right_n / count) * gini(right_ones, right_n);
                if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        decrease,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable(n: usize) -> (Vec<f64>, Vec<u8>) {
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let x = (i as f64 / n as f64) * 2.0 - 1.0 + if i % 2 == 0 { 1e-4 } else { -1e-4 };
            values.push(x);
            labels.push(u8::from(x >= 0.0));
        }
        (values, labels)
    }

    fn manifest(w: usize) -> Vec<String> {
        (0..w).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn single_class_data_gives_constant_model() {
        let values = vec![1.0, 2.0, 3.0, 4.0];
        let labels = vec![1, 1, 1, 1];
        let data = Dataset {
            width: 1,
            values: &values,
            labels: &labels,
        };
        let model = train_ensemble(
            data,
            &manifest(1),
            &EnsembleParams::new(EnsembleKind::ExtraTrees, 1),
        )
        .unwrap();
        let scores = predict_proba(&model, data).unwrap();
        assert!(scores.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn separable_data_trains_to_purity() {
        let (values, labels) = separable(500);
        let data = Dataset {
            width: 1,
            values: &values,
            labels: &labels,
        };
        let mut params = EnsembleParams::new(EnsembleKind::ExtraTrees, 42);
        params.n_trees = 30;
        let model = train_ensemble(data, &manifest(1), &params).unwrap();
        let scores = predict_proba(&model, data).unwrap();
        let correct = scores
            .iter()
            .zip(&labels)
            .filter(|(&s, &l)| u8::from(s >= 0.5) == l)
            .count();
        assert_eq!(correct, 500);
    }

    #[test]
    fn same_seed_identical_predictions() {
        let (values, labels) = separable(200);
        let data = Dataset {
            width: 1,
            values: &values,
            labels: &labels,
        };
        for kind in [EnsembleKind::ExtraTrees, EnsembleKind::RandomForest] {
            let mut params = EnsembleParams::new(kind, 7);
            params.n_trees = 10;
            let a = train_ensemble(data, &manifest(1), &params).unwrap();
            let b = train_ensemble(data, &manifest(1), &params).unwrap();
            assert_eq!(
                predict_proba(&a, data).unwrap(),
                predict_proba(&b, data).unwrap()
            );
        }
    }

    #[test]
    fn tree_prefix_stable_as_forest_grows() {
        let (values, labels) = separable(120);
        let data = Dataset {
            width: 1,
            values: &values,
            labels: &labels,
        };
        let mut small = EnsembleParams::new(EnsembleKind::ExtraTrees, 3);
        small.n_trees = 4;
        let mut big = small.clone();
        big.n_trees = 9;
        let a = train_ensemble(data, &manifest(1), &small).unwrap();
        let b = train_ensemble(data, &manifest(1), &big).unwrap();
        for t in 0..4 {
            assert_eq!(a.trees[t], b.trees[t]);
        }
    }

    #[test]
    fn tie_scores_predict_positive() {
        // Two trees voting 0.0 and 1.0 average to 0.5, which the >= rule
        // maps to the positive class.
        let model = TreeEnsembleModel {
            params: EnsembleParams::new(EnsembleKind::ExtraTrees, 0),
            column_manifest: manifest(1),
            trees: vec![
                Tree {
                    nodes: vec![TreeNode::Leaf {
                        fraction: 0.0,
                        count: 1,
                    }],
                },
                Tree {
                    nodes: vec![TreeNode::Leaf {
                        fraction: 1.0,
                        count: 1,
                    }],
                },
            ],
        };
        let values = vec![0.3];
        let labels = vec![0];
        let data = Dataset {
            width: 1,
            values: &values,
            labels: &labels,
        };
        let scores = predict_proba(&model, data).unwrap();
        assert_eq!(scores[0], 0.5);
        assert_eq!(u8::from(scores[0] >= 0.5), 1);
    }

    #[test]
    fn column_mismatch_rejected() {
        let values = vec![1.0, 0.0];
        let labels = vec![1, 0];
        let data = Dataset {
            width: 1,
            values: &values,
            labels: &labels,
        };
        let model = train_ensemble(
            data,
            &manifest(1),
            &EnsembleParams::new(EnsembleKind::ExtraTrees, 0),
        )
        .unwrap();
        let wide = Dataset {
            width: 2,
            values: &values,
            labels: &labels[..1],
        };
        assert_eq!(
            predict_proba(&model, wide).unwrap_err(),
            ClassifyError::ColumnMismatch {
                expected: 1,
                got: 2
            }
        );
    }

    #[test]
    fn empty_table_rejected() {
        let data = Dataset {
            width: 1,
            values: &[],
            labels: &[],
        };
        assert_eq!(
            train_ensemble(
                data,
                &manifest(1),
                &EnsembleParams::new(EnsembleKind::ExtraTrees, 0)
            )
            .unwrap_err(),
            ClassifyError::EmptyTable
        );
    }

    #[test]
    fn random_forest_learns_two_dim_checkerboard_corners() {
        // Simple 2-D AND task: label 1 only in the upper-right quadrant.
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                let x = i as f64 / 10.0 - 1.0;
                let y = j as f64 / 10.0 - 1.0;
                values.push(x);
                values.push(y);
                labels.push(u8::from(x > 0.1 && y > 0.1));
            }
        }
        let data = Dataset {
            width: 2,
            values: &values,
            labels: &labels,
        };
        let mut params = EnsembleParams::new(EnsembleKind::RandomForest, 5);
        params.n_trees = 40;
        params.max_features = Some(2);
        let model = train_ensemble(data, &manifest(2), &params).unwrap();
        let scores = predict_proba(&model, data).unwrap();
        let acc = scores
            .iter()
            .zip(&labels)
            .filter(|(&s, &l)| u8::from(s >= 0.5) == l)
            .count() as f64
            / labels.len() as f64;
        assert!(acc > 0.98, "train accuracy {acc}");
    }

    #[test]
    fn permuting_query_rows_permutes_scores() {
        let (values, labels) = separable(50);
        let data = Dataset {
            width: 1,
            values: &values,
            labels: &labels,
        };
        let mut params = EnsembleParams::new(EnsembleKind::ExtraTrees, 9);
        params.n_trees = 5;
        let model = train_ensemble(data, &manifest(1), &params).unwrap();
        let fwd = predict_proba(&model, data).unwrap();
        let mut rev_values: Vec<f64> = values.clone();
        rev_values.reverse();
        let rev = Dataset {
            width: 1,
            values: &rev_values,
            labels: &labels,
        };
        let bwd = predict_proba(&model, rev).unwrap();
        for i in 0..50 {
            assert_eq!(fwd[i], bwd[49 - i]);
        }
    }
}
