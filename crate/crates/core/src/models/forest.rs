//! Random forest and extra-trees ensembles over the CART builder.
//!
//! Trees are independent: tree i is seeded with `master seed + i`, so
//! training may fan out across worker threads and still produce identical
//! ensembles at any thread count.

use crate::parallel;
use crate::rng::Rng;

use super::tree::{fit_classification, Tree, TreeOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForestKind {
    /// Bootstrap rows; exhaustive midpoint search over a sqrt(d) feature
    /// subsample per split.
    Bagged,
    /// All rows; one uniform random threshold per sampled feature per split.
    ExtraTrees,
}

pub fn train_forest(
    x: &[Vec<f64>],
    y: &[u8],
    kind: ForestKind,
    n_estimators: usize,
    max_depth: Option<usize>,
    seed: u64,
    workers: usize,
) -> ForestModel {
    let n = x.len();
    let d = x[0].len();
    let subsample = (d as f64).sqrt().ceil() as usize;
    let opts = TreeOptions {
        max_depth,
        feature_subsample: Some(subsample.max(1)),
        random_thresholds: matches!(kind, ForestKind::ExtraTrees),
        ..TreeOptions::default()
    };
    let trees = parallel::map_indexed(n_estimators, workers, |i| {
        let mut rng = Rng::seed_from(seed.wrapping_add(i as u64));
        let indices: Vec<usize> = match kind {
            ForestKind::Bagged => (0..n).map(|_| rng.gen_range(n)).collect(),
            ForestKind::ExtraTrees => (0..n).collect(),
        };
        fit_classification(x, y, indices, &opts, Some(&mut rng))
    });
    ForestModel { trees }
}

impl ForestModel {
    /// Mean leaf fraction over the trees, in tree order.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}
