use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{softmax, AdamConfig, AdamState};
use crate::tensor::Tensor2;

/// Scores `W·z + b` on standardised features `z = (x − mean) / std`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// `classes × features`.
    pub weights: Tensor2,
    pub bias: Vec<f64>,
}

impl LinearModel {
    fn zeros(mean: Vec<f64>, std: Vec<f64>, classes: usize) -> Self {
        let d = mean.len();
        Self {
            mean,
            std,
            weights: Tensor2::zeros(classes, d),
            bias: vec![0.0; classes],
        }
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let z = self.standardize(x);
        self.scores_standardized(&z)
    }

    fn scores_standardized(&self, z: &[f64]) -> Vec<f64> {
        (0..self.bias.len())
            .map(|k| self.bias[k] + self.weights.row(k).iter().zip(z).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GdParams {
    /// Adam step size.
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 penalty on the weights.
    pub l2: f64,
}

impl Default for GdParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.2,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

/// Per-sample loss of the multiclass linear models: `Hinge` is the Crammer–Singer hinge,
/// `Log` the softmax cross-entropy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SgdLoss {
    Hinge,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdParams {
    pub loss: SgdLoss,
    /// Step size at epoch 0; decays as `eta0 / √(1 + epoch)`.
    pub eta0: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for SgdParams {
    fn default() -> Self {
        Self {
            loss: SgdLoss::Log,
            eta0: 2.0,
            epochs: 100,
            l2: 1e-5,
        }
    }
}

fn standardized(xs: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let d = xs[0].len();
    let n = xs.len() as f64;
    let mut mean = vec![0.0; d];
    for x in xs {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v / n;
        }
    }
    let mut std = vec![0.0; d];
    for x in xs {
        for ((s, v), m) in std.iter_mut().zip(x).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    std.iter_mut().for_each(|s| *s = if *s > 1e-24 { libm::sqrt(*s) } else { 1.0 });
    let zs = xs
        .iter()
        .map(|x| x.iter().zip(mean.iter().zip(&std)).map(|(v, (m, s))| (v - m) / s).collect())
        .collect();
    (mean, std, zs)
}

/// Adds `scale · ∂loss/∂θ` of one standardised sample to `(gw, gb)`.
fn accumulate(m: &LinearModel, z: &[f64], y: usize, loss: SgdLoss, scale: f64, gw: &mut Tensor2, gb: &mut [f64]) {
    let s = m.scores_standardized(z);
    let mut ds = vec![0.0; s.len()];
    match loss {
        SgdLoss::Log => {
            ds = softmax(&s);
            ds[y] -= 1.0;
        }
        SgdLoss::Hinge => {
            // Crammer–Singer: penalise the strongest rival within a unit margin
            let mut rival = None;
            let mut best = s[y];
            for (k, &v) in s.iter().enumerate() {
                if k != y && v + 1.0 > best {
                    best = v + 1.0;
                    rival = Some(k);
                }
            }
            if let Some(r) = rival {
                ds[y] = -1.0;
                ds[r] = 1.0;
            }
        }
    }
    for (k, d) in ds.iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        gb[k] += scale * d;
        for (g, v) in gw.row_mut(k).iter_mut().zip(z) {
            *g += scale * d * v;
        }
    }
}

/// Full-batch Adam on the mean sample loss plus `l2/2·‖W‖²`.
fn fit_full_batch(xs: &[Vec<f64>], ys: &[usize], classes: usize, p: GdParams, loss: SgdLoss) -> LinearModel {
    let (mean, std, zs) = standardized(xs);
    let mut m = LinearModel::zeros(mean, std, classes);
    let n = zs.len() as f64;
    let d = m.mean.len();
    let mut adam = AdamState::new(AdamConfig::with_alpha(p.learning_rate), classes * d + classes)
        .expect("default Adam betas are valid");
    let mut flat = vec![0.0; classes * d + classes];
    let mut grad = vec![0.0; classes * d + classes];
    for _ in 0..p.epochs {
        let mut gw = Tensor2::zeros(classes, d);
        let mut gb = vec![0.0; classes];
        for (z, &y) in zs.iter().zip(ys) {
            accumulate(&m, z, y, loss, 1.0 / n, &mut gw, &mut gb);
        }
        for (g, w) in gw.data_mut().iter_mut().zip(m.weights.data()) {
            *g += p.l2 * w;
        }
        flat[..classes * d].copy_from_slice(m.weights.data());
        flat[classes * d..].copy_from_slice(&m.bias);
        grad[..classes * d].copy_from_slice(gw.data());
        grad[classes * d..].copy_from_slice(&gb);
        adam.step_flat(&mut flat, &grad).expect("lengths fixed above");
        m.weights.data_mut().copy_from_slice(&flat[..classes * d]);
        m.bias.copy_from_slice(&flat[classes * d..]);
    }
    m
}

/// Multinomial logistic regression.
pub(crate) fn fit_logistic(xs: &[Vec<f64>], ys: &[usize], classes: usize, p: GdParams) -> LinearModel {
    fit_full_batch(xs, ys, classes, p, SgdLoss::Log)
}

/// Linear SVM with the Crammer–Singer multiclass hinge loss.
pub(crate) fn fit_svm(xs: &[Vec<f64>], ys: &[usize], classes: usize, p: GdParams) -> LinearModel {
    fit_full_batch(xs, ys, classes, p, SgdLoss::Hinge)
}

/// Plain stochastic gradient descent, one shuffled sample at a time.
pub(crate) fn fit_sgd(xs: &[Vec<f64>], ys: &[usize], classes: usize, p: SgdParams, seed: u64) -> LinearModel {
    let (mean, std, zs) = standardized(xs);
    let mut m = LinearModel::zeros(mean, std, classes);
    let d = m.mean.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..zs.len()).collect();
    let mut gw = Tensor2::zeros(classes, d);
    let mut gb = vec![0.0; classes];
    for epoch in 0..p.epochs {
        order.shuffle(&mut rng);
        let eta = p.eta0 / libm::sqrt(1.0 + epoch as f64);
        for &i in &order {
            gw.data_mut().iter_mut().for_each(|g| *g = 0.0);
            gb.iter_mut().for_each(|g| *g = 0.0);
            accumulate(&m, &zs[i], ys[i], p.loss, 1.0, &mut gw, &mut gb);
            for (w, g) in m.weights.data_mut().iter_mut().zip(gw.data()) {
                *w -= eta * (g + p.l2 * *w);
            }
            for (b, g) in m.bias.iter_mut().zip(&gb) {
                *b -= eta * g;
            }
        }
    }
    m
}
