use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::tensor::Tensor2;

/// Per-column z-scoring. Columns with (near) zero spread keep unit scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ChannelScaler {
    pub fn identity(channels: usize) -> Self {
        Self {
            mean: vec![0.0; channels],
            std: vec![1.0; channels],
        }
    }

    pub fn fit(x: &Tensor2) -> Self {
        let n = x.rows().max(1) as f64;
        let c = x.cols();
        let mut mean = vec![0.0; c];
        for r in 0..x.rows() {
            for (m, v) in mean.iter_mut().zip(x.row(r)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; c];
        for r in 0..x.rows() {
            for ((s, v), m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = libm::sqrt(s / n);
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &Tensor2) -> Tensor2 {
        let mut out = x.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}
