use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Per-class independent Gaussians over each feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: Vec<f64>,
    /// `classes × features`.
    pub means: Vec<Vec<f64>>,
    pub vars: Vec<Vec<f64>>,
}

impl GaussianNb {
    /// Joint log-likelihood per class index.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.log_prior
            .iter()
            .zip(self.means.iter().zip(&self.vars))
            .map(|(lp, (mu, var))| {
                let mut s = *lp;
                for ((xi, m), v) in x.iter().zip(mu).zip(var) {
                    s -= 0.5 * (libm::log(core::f64::consts::TAU * v) + (xi - m) * (xi - m) / v);
                }
                s
            })
            .collect()
    }
}

/// Variances are inflated by `smoothing` times the largest feature variance.
pub(crate) fn fit_nb(xs: &[Vec<f64>], ys: &[usize], classes: usize, smoothing: f64) -> GaussianNb {
    let d = xs[0].len();
    let n = xs.len() as f64;
    let mut count = vec![0.0; classes];
    let mut means = vec![vec![0.0; d]; classes];
    for (x, &y) in xs.iter().zip(ys) {
        count[y] += 1.0;
        for (m, v) in means[y].iter_mut().zip(x) {
            *m += v;
        }
    }
    for (m, c) in means.iter_mut().zip(&count) {
        m.iter_mut().for_each(|v| *v /= c);
    }
    let mut vars = vec![vec![0.0; d]; classes];
    for (x, &y) in xs.iter().zip(ys) {
        for ((s, v), m) in vars[y].iter_mut().zip(x).zip(&means[y]) {
            *s += (v - m) * (v - m);
        }
    }
    for (s, c) in vars.iter_mut().zip(&count) {
        s.iter_mut().for_each(|v| *v /= c);
    }
    let mut widest = 0.0f64;
    for j in 0..d {
        let mean = xs.iter().map(|x| x[j]).sum::<f64>() / n;
        let var = xs.iter().map(|x| (x[j] - mean) * (x[j] - mean)).sum::<f64>() / n;
        widest = widest.max(var);
    }
    let eps = (smoothing * widest).max(f64::MIN_POSITIVE);
    vars.iter_mut().flatten().for_each(|v| *v += eps);
    GaussianNb {
        log_prior: count.iter().map(|c| libm::log(c / n)).collect(),
        means,
        vars,
    }
}
