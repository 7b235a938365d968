//! Gradient-boosted trees on the logistic loss: stagewise regression trees
//! fit to negative gradients, Newton leaf values, scores starting at the
//! base-rate log-odds.

use super::tree::{fit_regression, Tree, TreeOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    pub base_score: f64,
    pub eta: f64,
    pub trees: Vec<Tree>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable binary cross-entropy from the logit.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) + (1.0 + (-z.abs()).exp()).ln() - y * z
}

pub struct GbtParams {
    pub eta: f64,
    pub n_rounds: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

pub fn train_gbt(x: &[Vec<f64>], y: &[u8], params: &GbtParams) -> (GbtModel, Vec<f64>) {
    let n = x.len();
    let pos = y.iter().filter(|&&l| l == 1).count() as f64;
    let rate = pos / n as f64;
    let base_score = (rate / (1.0 - rate)).ln();
    let opts = TreeOptions {
        max_depth: Some(params.max_depth),
        min_samples_leaf: params.min_samples_leaf,
        ..TreeOptions::default()
    };
    let mut scores = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    let mut loss_per_round = Vec::with_capacity(params.n_rounds + 1);
    let mean_loss = |scores: &[f64]| -> f64 {
        scores
            .iter()
            .zip(y)
            .map(|(&z, &l)| bce_from_logit(z, f64::from(l)))
            .sum::<f64>()
            / n as f64
    };
    loss_per_round.push(mean_loss(&scores));
    let mut gradients = vec![0.0f64; n];
    let mut hessians = vec![0.0f64; n];
    for _ in 0..params.n_rounds {
        for i in 0..n {
            let p = sigmoid(scores[i]);
            gradients[i] = f64::from(y[i]) - p;
            hessians[i] = p * (1.0 - p);
        }
        let tree = fit_regression(x, &gradients, Some(&hessians), (0..n).collect(), &opts, None);
        for (score, row) in scores.iter_mut().zip(x) {
            *score += params.eta * tree.predict(row);
        }
        trees.push(tree);
        loss_per_round.push(mean_loss(&scores));
    }
    (GbtModel { base_score, eta: params.eta, trees }, loss_per_round)
}

impl GbtModel {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let mut z = self.base_score;
        for tree in &self.trees {
            z += self.eta * tree.predict(row);
        }
        sigmoid(z)
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}
