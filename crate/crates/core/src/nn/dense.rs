use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_len, sigmoid, uniform_init, NnError, Parameters};
use crate::tensor::Tensor2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Softmax,
    Sigmoid,
    Tanh,
}

/// Fully connected layer `activation(W·x + b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub weights: Tensor2,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseParams {
    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        Self {
            weights: Tensor2::zeros(output, input),
            bias: vec![0.0; output],
            activation,
        }
    }

    pub fn init<R: Rng + ?Sized>(input: usize, output: usize, activation: Activation, rng: &mut R) -> Self {
        let mut p = Self::zeros(input, output, activation);
        uniform_init(p.weights.data_mut(), input, rng);
        uniform_init(&mut p.bias, input, rng);
        p
    }

    pub fn input_size(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_size(&self) -> usize {
        self.weights.rows()
    }

    /// Pre-activation `W·x + b` without checks.
    #[inline]
    pub(crate) fn logits(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        self.weights.matvec_acc(x, out);
    }
}

impl Parameters for DenseParams {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.weights.data());
        f(&self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.weights.data_mut());
        f(&mut self.bias);
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.input_size(), self.output_size(), self.activation)
    }
}

/// Numerically stable softmax. Every output is floored at the smallest positive normal so
/// the distribution stays strictly positive even when a logit gap underflows `exp`.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    out
}

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = libm::exp(*x - max);
        sum += *x;
    }
    for x in v.iter_mut() {
        *x = (*x / sum).max(f64::MIN_POSITIVE);
    }
}

pub(crate) fn activate(activation: Activation, z: &mut [f64]) {
    match activation {
        Activation::Identity => {}
        Activation::Softmax => softmax_in_place(z),
        Activation::Sigmoid => z.iter_mut().for_each(|v| *v = sigmoid(*v)),
        Activation::Tanh => z.iter_mut().for_each(|v| *v = libm::tanh(*v)),
    }
}

pub fn dense_forward(x: &[f64], p: &DenseParams) -> Result<Vec<f64>, NnError> {
    check_len("dense bias", p.output_size(), p.bias.len())?;
    check_len("dense input", p.input_size(), x.len())?;
    let mut out = vec![0.0; p.output_size()];
    p.logits(x, &mut out);
    activate(p.activation, &mut out);
    Ok(out)
}

/// Backward through `y = activation(W·x + b)` given `dy = ∂L/∂y`.
/// Accumulates parameter gradients and returns `∂L/∂x`.
pub fn dense_backward(p: &DenseParams, x: &[f64], y: &[f64], dy: &[f64], grads: &mut DenseParams) -> Vec<f64> {
    let dz: Vec<f64> = match p.activation {
        Activation::Identity => dy.to_vec(),
        Activation::Sigmoid => dy.iter().zip(y).map(|(d, y)| d * y * (1.0 - y)).collect(),
        Activation::Tanh => dy.iter().zip(y).map(|(d, y)| d * (1.0 - y * y)).collect(),
        Activation::Softmax => {
            let s: f64 = dy.iter().zip(y).map(|(d, y)| d * y).sum();
            dy.iter().zip(y).map(|(d, y)| y * (d - s)).collect()
        }
    };
    backward_from_logits(p, x, &dz, grads)
}

/// Backward given `∂L/∂z` for the pre-activation `z`.
pub(crate) fn backward_from_logits(p: &DenseParams, x: &[f64], dz: &[f64], grads: &mut DenseParams) -> Vec<f64> {
    grads.weights.add_outer(dz, x);
    for (b, d) in grads.bias.iter_mut().zip(dz) {
        *b += d;
    }
    let mut dx = vec![0.0; p.input_size()];
    p.weights.matvec_t_acc(dz, &mut dx);
    dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradient_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_layer_passes_input_through() {
        let p = DenseParams {
            weights: Tensor2::identity(3),
            bias: vec![0.0; 3],
            activation: Activation::Identity,
        };
        assert_eq!(dense_forward(&[1.5, -2.0, 0.25], &p).unwrap(), vec![1.5, -2.0, 0.25]);
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_matches_direct_formula() {
        let z = [1.0, 2.0, 3.0];
        let denom: f64 = z.iter().map(|v| libm::exp(*v)).sum();
        let p = softmax(&z);
        for (pi, zi) in p.iter().zip(z) {
            assert!((pi - libm::exp(zi) / denom).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_dimension_mismatch() {
        let p = DenseParams::zeros(3, 2, Activation::Identity);
        assert!(dense_forward(&[1.0, 2.0], &p).is_err());
    }

    #[test]
    fn gradients_match_finite_differences_for_each_activation() {
        for (seed, act) in [Activation::Identity, Activation::Softmax, Activation::Sigmoid, Activation::Tanh]
            .into_iter()
            .enumerate()
        {
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            let p = DenseParams::init(4, 3, act, &mut rng);
            let x = [0.2, -0.7, 1.1, 0.4];
            let w = [0.3, -1.2, 0.9];
            let loss = |q: &DenseParams| {
                let y = dense_forward(&x, q).unwrap();
                y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
            };
            let y = dense_forward(&x, &p).unwrap();
            let mut grads = p.zeros_like();
            dense_backward(&p, &x, &y, &w, &mut grads);
            let report = gradient_check(&p, &grads, 1e-5, loss);
            assert!(report.max_rel_error < 1e-4, "{act:?}: {report:?}");
        }
    }
}
