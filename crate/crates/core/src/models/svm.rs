//! Linear SVM trained with Pegasos-style hinge-loss SGD; probabilities come
//! from a logistic link on the margin.

use crate::rng::Rng;

use super::standardize::Standardizer;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
}

pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { lambda: 1e-4, epochs: 10 }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn train_svm(x: &[Vec<f64>], y: &[u8], params: &SvmParams, seed: u64) -> SvmModel {
    let standardizer = Standardizer::fit(x);
    let xs = standardizer.transform(x);
    let n = xs.len();
    let d = xs[0].len();
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut rng = Rng::derive(seed, 0x73766d);
    let steps = params.epochs * n;
    for t in 1..=steps {
        let i = rng.gen_range(n);
        let yi = if y[i] == 1 { 1.0 } else { -1.0 };
        let eta = 1.0 / (params.lambda * t as f64);
        let margin = yi * (xs[i].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b);
        let shrink = 1.0 - eta * params.lambda;
        for wj in &mut w {
            *wj *= shrink;
        }
        if margin < 1.0 {
            for (wj, xj) in w.iter_mut().zip(&xs[i]) {
                *wj += eta * yi * xj;
            }
            // Bias stays unregularized.
            b += eta * yi;
        }
    }
    SvmModel { standardizer, weights: w, bias: b }
}

impl SvmModel {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let xs = self.standardizer.transform_row(row);
        let margin = xs.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias;
        sigmoid(margin)
    }
}
