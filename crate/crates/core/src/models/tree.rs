//! CART trees: Gini classification trees, variance-reduction regression
//! trees (for boosting), and the randomized variants used by the forests.
//!
//! Split search is exhaustive over midpoints of sorted distinct feature
//! values, maximizing impurity decrease; ties break toward the lower feature
//! index, then the lower threshold. Rows with value <= threshold go left.

use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
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

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Root split, when the root is not a leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first() {
            Some(TreeNode::Split { feature, threshold, .. }) => Some((*feature, *threshold)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreeOptions {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Candidate features per split (without replacement); None means all.
    pub feature_subsample: Option<usize>,
    /// Extra-trees mode: one uniform random threshold per candidate feature
    /// instead of the exhaustive midpoint scan.
    pub random_thresholds: bool,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            feature_subsample: None,
            random_thresholds: false,
        }
    }
}

/// Targets seen by the split search: binary labels scored with Gini, or
/// real-valued gradients scored with variance. The `cost` of an index set is
/// n times its impurity, so gains are cost(parent) - cost(left) -
/// cost(right).
enum Targets<'a> {
    Classes {
        y: &'a [u8],
    },
    Residuals {
        gradients: &'a [f64],
        hessians: Option<&'a [f64]>,
    },
}

impl Targets<'_> {
    fn cost(&self, indices: &[usize]) -> f64 {
        match self {
            Targets::Classes { y } => {
                let n = indices.len() as f64;
                let ones = indices.iter().filter(|&&i| y[i] == 1).count() as f64;
                let zeros = n - ones;
                n - (ones * ones + zeros * zeros) / n
            }
            Targets::Residuals { gradients, .. } => {
                let n = indices.len() as f64;
                let sum: f64 = indices.iter().map(|&i| gradients[i]).sum();
                let sumsq: f64 = indices.iter().map(|&i| gradients[i] * gradients[i]).sum();
                sumsq - sum * sum / n
            }
        }
    }

    fn is_pure(&self, indices: &[usize]) -> bool {
        match self {
            Targets::Classes { y } => {
                let first = y[indices[0]];
                indices.iter().all(|&i| y[i] == first)
            }
            Targets::Residuals { gradients, .. } => {
                let first = gradients[indices[0]];
                indices.iter().all(|&i| gradients[i] == first)
            }
        }
    }

    fn leaf_value(&self, indices: &[usize]) -> f64 {
        match self {
            Targets::Classes { y } => {
                let ones = indices.iter().filter(|&&i| y[i] == 1).count() as f64;
                ones / indices.len() as f64
            }
            Targets::Residuals { gradients, hessians } => {
                let sum_g: f64 = indices.iter().map(|&i| gradients[i]).sum();
                match hessians {
                    // Newton step for the logistic loss.
                    Some(h) => {
                        let sum_h: f64 = indices.iter().map(|&i| h[i]).sum();
                        if sum_h <= 1e-12 {
                            0.0
                        } else {
                            sum_g / sum_h
                        }
                    }
                    None => sum_g / indices.len() as f64,
                }
            }
        }
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    targets: Targets<'a>,
    opts: &'a TreeOptions,
    rng: Option<&'a mut Rng>,
    nodes: Vec<TreeNode>,
    scratch: Vec<usize>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn build(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let stop = indices.len() < self.opts.min_samples_split
            || self.opts.max_depth.is_some_and(|d| depth >= d)
            || self.targets.is_pure(&indices);
        if !stop {
            if let Some(split) = self.find_split(&indices) {
                let (left_set, right_set): (Vec<usize>, Vec<usize>) = indices
                    .iter()
                    .partition(|&&i| self.x[i][split.feature] <= split.threshold);
                let at = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { value: 0.0 });
                let left = self.build(left_set, depth + 1);
                let right = self.build(right_set, depth + 1);
                self.nodes[at] = TreeNode::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left,
                    right,
                };
                return at;
            }
        }
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            value: self.targets.leaf_value(&indices),
        });
        at
    }

    /// Candidate features for this split, ascending so ties resolve toward
    /// the lower feature index.
    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.x[0].len();
        match self.opts.feature_subsample {
            Some(k) if k < d => {
                let rng = self.rng.as_deref_mut().expect("feature subsampling needs an rng");
                let mut picked = rng.sample_indices(d, k, &mut self.scratch);
                picked.sort_unstable();
                picked
            }
            _ => (0..d).collect(),
        }
    }

    fn find_split(&mut self, indices: &[usize]) -> Option<BestSplit> {
        let features = self.candidate_features();
        let parent_cost = self.targets.cost(indices);
        let mut best: Option<BestSplit> = None;
        for feature in features {
            if self.opts.random_thresholds {
                self.random_threshold_candidate(indices, feature, parent_cost, &mut best);
            } else {
                match &self.targets {
                    Targets::Classes { y } => {
                        scan_classification(self.x, y, indices, feature, parent_cost, self.opts, &mut best)
                    }
                    Targets::Residuals { gradients, .. } => scan_regression(
                        self.x, gradients, indices, feature, parent_cost, self.opts, &mut best,
                    ),
                }
            }
        }
        best
    }

    fn consider(
        &self,
        indices: &[usize],
        feature: usize,
        threshold: f64,
        parent_cost: f64,
        best: &mut Option<BestSplit>,
    ) {
        let left: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| self.x[i][feature] <= threshold)
            .collect();
        let n_left = left.len();
        let n_right = indices.len() - n_left;
        if n_left < self.opts.min_samples_leaf || n_right < self.opts.min_samples_leaf {
            return;
        }
        let right: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| self.x[i][feature] > threshold)
            .collect();
        let gain = parent_cost - self.targets.cost(&left) - self.targets.cost(&right);
        record_candidate(gain, feature, threshold, best);
    }

    fn random_threshold_candidate(
        &mut self,
        indices: &[usize],
        feature: usize,
        parent_cost: f64,
        best: &mut Option<BestSplit>,
    ) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in indices {
            lo = lo.min(self.x[i][feature]);
            hi = hi.max(self.x[i][feature]);
        }
        if lo >= hi {
            return;
        }
        let rng = self.rng.as_deref_mut().expect("random thresholds need an rng");
        let threshold = lo + rng.next_f64() * (hi - lo);
        self.consider(indices, feature, threshold, parent_cost, best);
    }
}

fn record_candidate(
    gain: f64,
    feature: usize,
    threshold: f64,
    best: &mut Option<BestSplit>,
) {
    if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
        *best = Some(BestSplit { gain, feature, threshold });
    }
}

/// Exhaustive midpoint scan for classification: one sort per feature, then
/// prefix label counts give each candidate's Gini cost in O(1).
#[allow(clippy::too_many_arguments)]
fn scan_classification(
    x: &[Vec<f64>],
    y: &[u8],
    indices: &[usize],
    feature: usize,
    parent_cost: f64,
    opts: &TreeOptions,
    best: &mut Option<BestSplit>,
) {
    let mut sorted: Vec<usize> = indices.to_vec();
    sorted.sort_by(|&a, &b| {
        x[a][feature]
            .partial_cmp(&x[b][feature])
            .expect("finite feature values")
    });
    let n = sorted.len();
    let total_ones = sorted.iter().filter(|&&i| y[i] == 1).count() as f64;
    let total = n as f64;
    let mut left_ones = 0.0f64;
    for k in 1..n {
        left_ones += f64::from(y[sorted[k - 1]]);
        let prev = x[sorted[k - 1]][feature];
        let next = x[sorted[k]][feature];
        if prev == next {
            continue;
        }
        if k < opts.min_samples_leaf || n - k < opts.min_samples_leaf {
            continue;
        }
        let n_l = k as f64;
        let n_r = total - n_l;
        let ones_l = left_ones;
        let zeros_l = n_l - ones_l;
        let ones_r = total_ones - ones_l;
        let zeros_r = n_r - ones_r;
        let cost_l = n_l - (ones_l * ones_l + zeros_l * zeros_l) / n_l;
        let cost_r = n_r - (ones_r * ones_r + zeros_r * zeros_r) / n_r;
        let gain = parent_cost - cost_l - cost_r;
        record_candidate(gain, feature, 0.5 * (prev + next), best);
    }
}

/// Exhaustive midpoint scan for regression targets with prefix sums; cost is
/// the sum of squared deviations from the child mean.
#[allow(clippy::too_many_arguments)]
fn scan_regression(
    x: &[Vec<f64>],
    gradients: &[f64],
    indices: &[usize],
    feature: usize,
    parent_cost: f64,
    opts: &TreeOptions,
    best: &mut Option<BestSplit>,
) {
    let mut sorted: Vec<usize> = indices.to_vec();
    sorted.sort_by(|&a, &b| {
        x[a][feature]
            .partial_cmp(&x[b][feature])
            .expect("finite feature values")
    });
    let n = sorted.len();
    let total_sum: f64 = sorted.iter().map(|&i| gradients[i]).sum();
    let total_sumsq: f64 = sorted.iter().map(|&i| gradients[i] * gradients[i]).sum();
    let mut left_sum = 0.0f64;
    let mut left_sumsq = 0.0f64;
    for k in 1..n {
        let g = gradients[sorted[k - 1]];
        left_sum += g;
        left_sumsq += g * g;
        let prev = x[sorted[k - 1]][feature];
        let next = x[sorted[k]][feature];
        if prev == next {
            continue;
        }
        if k < opts.min_samples_leaf || n - k < opts.min_samples_leaf {
            continue;
        }
        let n_l = k as f64;
        let n_r = (n - k) as f64;
        let right_sum = total_sum - left_sum;
        let right_sumsq = total_sumsq - left_sumsq;
        let cost_l = left_sumsq - left_sum * left_sum / n_l;
        let cost_r = right_sumsq - right_sum * right_sum / n_r;
        let gain = parent_cost - cost_l - cost_r;
        record_candidate(gain, feature, 0.5 * (prev + next), best);
    }
}

fn fit(
    x: &[Vec<f64>],
    targets: Targets<'_>,
    indices: Vec<usize>,
    opts: &TreeOptions,
    rng: Option<&mut Rng>,
) -> Tree {
    assert!(!indices.is_empty(), "cannot fit a tree on zero rows");
    let mut builder = Builder {
        x,
        targets,
        opts,
        rng,
        nodes: Vec::new(),
        scratch: Vec::new(),
    };
    builder.build(indices, 0);
    Tree { nodes: builder.nodes }
}

/// Gini classification tree over the given row indices; leaf values are the
/// fraction of label-1 rows.
pub fn fit_classification(
    x: &[Vec<f64>],
    y: &[u8],
    indices: Vec<usize>,
    opts: &TreeOptions,
    rng: Option<&mut Rng>,
) -> Tree {
    fit(x, Targets::Classes { y }, indices, opts, rng)
}

/// Variance-reduction regression tree on gradient targets. With hessians the
/// leaf value is the Newton step sum(g)/sum(h), otherwise the mean gradient.
pub fn fit_regression(
    x: &[Vec<f64>],
    gradients: &[f64],
    hessians: Option<&[f64]>,
    indices: Vec<usize>,
    opts: &TreeOptions,
    rng: Option<&mut Rng>,
) -> Tree {
    fit(x, Targets::Residuals { gradients, hessians }, indices, opts, rng)
}
