//! Feed-forward network d -> 128 -> 64 -> 32 -> 1 with relu hidden layers
//! and a sigmoid output, trained with Adam on binary cross-entropy over
//! standardized features. He-style initialization, seeded.

use crate::rng::Rng;

use super::standardize::Standardizer;

const HIDDEN: [usize; 3] = [128, 64, 32];

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out x n_in`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    fn apply(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.w[o * self.n_in..(o + 1) * self.n_in];
            let z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + self.b[o];
            out.push(z);
        }
    }

    fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub standardizer: Standardizer,
    pub layers: Vec<Dense>,
}

pub struct MlpParams {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            epochs: 20,
            batch_size: 256,
            learning_rate: 1e-3,
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

fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) + (1.0 + (-z.abs()).exp()).ln() - y * z
}

/// Pre-activations and activations per layer for one sample.
struct ForwardPass {
    /// activations[0] is the standardized input; activations[l] the output
    /// of layer l-1 after its nonlinearity.
    activations: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    zs: Vec<Vec<f64>>,
}

impl MlpModel {
    fn forward(&self, x_std: Vec<f64>) -> ForwardPass {
        let n_layers = self.layers.len();
        let mut activations = Vec::with_capacity(n_layers + 1);
        let mut zs = Vec::with_capacity(n_layers);
        activations.push(x_std);
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.apply(activations.last().expect("input present"), &mut z);
            let act: Vec<f64> = if l + 1 < n_layers {
                z.iter().map(|&v| v.max(0.0)).collect()
            } else {
                z.clone()
            };
            zs.push(z);
            activations.push(act);
        }
        ForwardPass { activations, zs }
    }

    fn logit_std(&self, x_std: Vec<f64>) -> f64 {
        let pass = self.forward(x_std);
        pass.zs.last().expect("output layer")[0]
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.logit_std(self.standardizer.transform_row(row)))
    }

    /// Mean binary cross-entropy over raw (unstandardized) rows.
    pub fn mean_loss(&self, rows: &[Vec<f64>], labels: &[u8]) -> f64 {
        let total: f64 = rows
            .iter()
            .zip(labels)
            .map(|(row, &y)| {
                bce_from_logit(
                    self.logit_std(self.standardizer.transform_row(row)),
                    f64::from(y),
                )
            })
            .sum();
        total / rows.len() as f64
    }

    /// Analytic gradients of the mean loss with respect to every parameter,
    /// flattened in [`param order`](Self::get_param).
    pub fn mean_loss_gradients(&self, rows: &[Vec<f64>], labels: &[u8]) -> Vec<f64> {
        let mut grads = vec![0.0f64; self.param_count()];
        for (row, &y) in rows.iter().zip(labels) {
            self.accumulate_sample_gradients(row, y, &mut grads);
        }
        let inv = 1.0 / rows.len() as f64;
        for g in &mut grads {
            *g *= inv;
        }
        grads
    }

    /// Backprop one sample, adding unscaled gradients into `grads`.
    fn accumulate_sample_gradients(&self, row: &[f64], y: u8, grads: &mut [f64]) {
        let pass = self.forward(self.standardizer.transform_row(row));
        let n_layers = self.layers.len();
        let z_out = pass.zs[n_layers - 1][0];
        // dL/dz for the sigmoid + cross-entropy head.
        let mut delta = vec![sigmoid(z_out) - f64::from(y)];
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            let input = &pass.activations[l];
            let offset = self.layer_offset(l);
            for o in 0..layer.n_out {
                let d = delta[o];
                let w_base = offset + o * layer.n_in;
                for (j, x) in input.iter().enumerate() {
                    grads[w_base + j] += d * x;
                }
                grads[offset + layer.w.len() + o] += d;
            }
            if l == 0 {
                break;
            }
            // delta for the previous layer: (W^T delta) gated by relu'.
            let prev_z = &pass.zs[l - 1];
            let mut prev_delta = vec![0.0f64; layer.n_in];
            for (o, &d) in delta.iter().enumerate() {
                let row_w = &layer.w[o * layer.n_in..(o + 1) * layer.n_in];
                for (pd, w) in prev_delta.iter_mut().zip(row_w) {
                    *pd += d * w;
                }
            }
            for (pd, &z) in prev_delta.iter_mut().zip(prev_z) {
                if z <= 0.0 {
                    *pd = 0.0;
                }
            }
            delta = prev_delta;
        }
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.layers[..layer].iter().map(Dense::param_count).sum()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    /// Flat parameter access, layer by layer, weights then biases.
    pub fn get_param(&self, idx: usize) -> f64 {
        let (layer, offset) = self.locate(idx);
        if offset < layer.w.len() {
            layer.w[offset]
        } else {
            layer.b[offset - layer.w.len()]
        }
    }

    pub fn set_param(&mut self, idx: usize, value: f64) {
        let mut rest = idx;
        for layer in &mut self.layers {
            if rest < layer.param_count() {
                if rest < layer.w.len() {
                    layer.w[rest] = value;
                } else {
                    let off = rest - layer.w.len();
                    layer.b[off] = value;
                }
                return;
            }
            rest -= layer.param_count();
        }
        panic!("parameter index {idx} out of range");
    }

    fn locate(&self, idx: usize) -> (&Dense, usize) {
        let mut rest = idx;
        for layer in &self.layers {
            if rest < layer.param_count() {
                return (layer, rest);
            }
            rest -= layer.param_count();
        }
        panic!("parameter index {idx} out of range");
    }
}

/// Fresh network with He-initialized weights and zero biases.
pub fn init_mlp(n_features: usize, standardizer: Standardizer, seed: u64) -> MlpModel {
    let mut rng = Rng::derive(seed, 0x6d6c70);
    let mut dims = vec![n_features];
    dims.extend_from_slice(&HIDDEN);
    dims.push(1);
    let layers = dims
        .windows(2)
        .map(|io| {
            let (n_in, n_out) = (io[0], io[1]);
            let scale = (2.0 / n_in as f64).sqrt();
            let w: Vec<f64> = (0..n_in * n_out).map(|_| rng.next_gaussian() * scale).collect();
            Dense { n_in, n_out, w, b: vec![0.0; n_out] }
        })
        .collect();
    MlpModel { standardizer, layers }
}

pub fn train_mlp(x: &[Vec<f64>], y: &[u8], params: &MlpParams, seed: u64) -> MlpModel {
    let standardizer = Standardizer::fit(x);
    let mut model = init_mlp(x[0].len(), standardizer, seed);
    let n = x.len();
    let n_params = model.param_count();

    // Adam state.
    let mut m = vec![0.0f64; n_params];
    let mut v = vec![0.0f64; n_params];
    let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut t = 0u64;

    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng = Rng::derive(seed, 0x626174);
    let mut grads = vec![0.0f64; n_params];
    for _ in 0..params.epochs {
        shuffle_rng.shuffle(&mut order);
        for batch in order.chunks(params.batch_size.max(1)) {
            grads.fill(0.0);
            for &i in batch {
                model.accumulate_sample_gradients(&x[i], y[i], &mut grads);
            }
            let inv = 1.0 / batch.len() as f64;
            t += 1;
            let bc1 = 1.0 - beta1.powi(t as i32);
            let bc2 = 1.0 - beta2.powi(t as i32);
            for (idx, g) in grads.iter().enumerate() {
                let g = g * inv;
                m[idx] = beta1 * m[idx] + (1.0 - beta1) * g;
                v[idx] = beta2 * v[idx] + (1.0 - beta2) * g * g;
                let m_hat = m[idx] / bc1;
                let v_hat = v[idx] / bc2;
                let step = params.learning_rate * m_hat / (v_hat.sqrt() + eps);
                model.set_param(idx, model.get_param(idx) - step);
            }
        }
    }
    model
}
