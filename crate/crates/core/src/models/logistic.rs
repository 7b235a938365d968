//! L2-regularized logistic regression trained with batch gradient descent on
//! internally standardized features.

use super::standardize::Standardizer;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
}

pub struct LogisticParams {
    pub lambda: f64,
    pub learning_rate: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            lambda: 1e-4,
            learning_rate: 0.1,
            max_iter: 500,
            tol: 1e-6,
        }
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

/// Batch gradient descent on cross-entropy with an L2 penalty on the weights
/// (not the bias). Stops when the gradient max-norm drops below `tol`.
pub fn train_logistic(x: &[Vec<f64>], y: &[u8], params: &LogisticParams) -> LogisticModel {
    let standardizer = Standardizer::fit(x);
    let xs = standardizer.transform(x);
    let n = xs.len();
    let d = xs[0].len();
    let mut weights = vec![0.0f64; d];
    let mut bias = 0.0f64;
    let mut grad_w = vec![0.0f64; d];
    for _ in 0..params.max_iter {
        grad_w.fill(0.0);
        let mut grad_b = 0.0f64;
        for (row, &label) in xs.iter().zip(y) {
            let z = row.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>() + bias;
            let err = sigmoid(z) - f64::from(label);
            for (g, v) in grad_w.iter_mut().zip(row) {
                *g += err * v;
            }
            grad_b += err;
        }
        let inv_n = 1.0 / n as f64;
        let mut max_norm = 0.0f64;
        for (g, w) in grad_w.iter_mut().zip(&weights) {
            *g = *g * inv_n + params.lambda * w;
            max_norm = max_norm.max(g.abs());
        }
        grad_b *= inv_n;
        max_norm = max_norm.max(grad_b.abs());
        if max_norm < params.tol {
            break;
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= params.learning_rate * g;
        }
        bias -= params.learning_rate * grad_b;
    }
    LogisticModel { standardizer, weights, bias }
}

impl LogisticModel {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let xs = self.standardizer.transform_row(row);
        let z = xs.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias;
        sigmoid(z)
    }
}
