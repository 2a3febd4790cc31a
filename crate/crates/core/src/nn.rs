//! Dense tanh network with manual backpropagation, and Adam.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fully connected network: tanh on hidden layers, linear output.
///
/// Parameters are stored flat, layer by layer: the `out × in` weight matrix
/// in row-major order followed by the `out` biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations recorded by [`Mlp::forward`] for one input.
#[derive(Debug, Clone)]
pub struct Trace {
    activations: Vec<Vec<f64>>,
}

impl Mlp {
    /// Xavier-uniform weights and zero biases.
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut mlp = Self::zeros(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut mlp.params[offset..offset + fan_in * fan_out] {
                *p = rng.gen_range(-bound..bound);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(mlp)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Parameter(format!("invalid layer sizes {sizes:?}")));
        }
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; count],
        })
    }

    pub fn from_parts(sizes: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        let mut mlp = Self::zeros(&sizes)?;
        if params.len() != mlp.params.len() {
            return Err(Error::Parameter(format!(
                "layer sizes {sizes:?} need {} parameters, got {}",
                mlp.params.len(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parameter("network parameters must be finite".into()));
        }
        mlp.params = params;
        Ok(mlp)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, Trace)> {
        if input.len() != self.input_dim() {
            return Err(Error::Parameter(format!(
                "network expects {} features, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        let layers = self.sizes.len() - 1;
        let mut activations = vec![input.to_vec()];
        let mut offset = 0;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let bias = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let prev = activations.last().unwrap();
            let mut out: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &weights[o * n_in..(o + 1) * n_in];
                    row.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>() + bias[o]
                })
                .collect();
            if l + 1 < layers {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            activations.push(out);
            offset += n_in * n_out + n_out;
        }
        let output = activations.last().unwrap().clone();
        Ok((output, Trace { activations }))
    }

    /// Accumulates `∂(grad_outᵀ output)/∂params` into `grads`.
    pub fn backward(&self, trace: &Trace, grad_out: &[f64], grads: &mut [f64]) -> Result<()> {
        if grad_out.len() != self.output_dim() || grads.len() != self.params.len() {
            return Err(Error::Parameter("gradient shape mismatch".into()));
        }
        let layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(layers);
        let mut offset = 0;
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }
        let mut delta = grad_out.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            if l + 1 < layers {
                let act = &trace.activations[l + 1];
                for (d, a) in delta.iter_mut().zip(act) {
                    *d *= 1.0 - a * a;
                }
            }
            let input = &trace.activations[l];
            let base = offsets[l];
            for o in 0..n_out {
                for i in 0..n_in {
                    grads[base + o * n_in + i] += delta[o] * input[i];
                }
                grads[base + n_in * n_out + o] += delta[o];
            }
            if l > 0 {
                let weights = &self.params[base..base + n_in * n_out];
                delta = (0..n_in)
                    .map(|i| (0..n_out).map(|o| weights[o * n_in + i] * delta[o]).sum())
                    .collect();
            }
        }
        Ok(())
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(lr: f64, dim: usize) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}
