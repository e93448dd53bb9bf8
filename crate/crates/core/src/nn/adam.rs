use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_len, NnError, Parameters};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }
}

/// First/second moment estimates, flattened in [`Parameters::visit`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig, param_count: usize) -> Result<Self, NnError> {
        if !(config.beta1 > 0.0 && config.beta1 < 1.0 && config.beta2 > 0.0 && config.beta2 < 1.0) {
            return Err(NnError::Config("adam betas must lie in (0, 1)"));
        }
        Ok(Self {
            config,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        })
    }

    pub fn for_params<P: Parameters>(config: AdamConfig, params: &P) -> Result<Self, NnError> {
        Self::new(config, params.param_count())
    }

    /// Bias-corrected Adam update on flat slices; `t` is incremented first.
    pub fn step_flat(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), NnError> {
        check_len("adam params", self.m.len(), params.len())?;
        check_len("adam grads", self.m.len(), grads.len())?;
        self.t += 1;
        let AdamConfig {
            alpha,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let c1 = 1.0 - libm::pow(beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(beta2, self.t as f64);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= alpha * m_hat / (libm::sqrt(v_hat) + epsilon);
        }
        Ok(())
    }
}

/// Applies one Adam step to a parameter container.
pub fn adam_step<P: Parameters>(params: &mut P, grads: &P, state: &mut AdamState) -> Result<(), NnError> {
    let mut flat = params.flatten();
    state.step_flat(&mut flat, &grads.flatten())?;
    params.assign_flat(&flat);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = AdamState::new(AdamConfig::default(), 3).unwrap();
        let mut p = vec![1.0, -2.0, 3.0];
        s.step_flat(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_moves_by_alpha() {
        // m̂ = 1, v̂ = 1, so the step is alpha / (1 + eps)
        let mut s = AdamState::new(AdamConfig::default(), 1).unwrap();
        let mut p = vec![0.5];
        s.step_flat(&mut p, &[1.0]).unwrap();
        let expected = 0.5 - 0.001 / (1.0 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn two_steps_follow_scalar_trace() {
        let (a, b1, b2, eps) = (0.01, 0.9, 0.999, 1e-8);
        let g = 0.3;
        // scalar hand evaluation
        let mut x = 2.0;
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - libm::pow(b1, t as f64));
            let vh = v / (1.0 - libm::pow(b2, t as f64));
            x -= a * mh / (libm::sqrt(vh) + eps);
        }
        let mut s = AdamState::new(AdamConfig::with_alpha(a), 1).unwrap();
        let mut p = vec![2.0];
        s.step_flat(&mut p, &[g]).unwrap();
        s.step_flat(&mut p, &[g]).unwrap();
        assert_eq!(p[0], x);
        assert!((p[0] - (2.0 - 2.0 * a)).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_betas_and_shapes() {
        let bad = AdamConfig {
            beta1: 1.0,
            ..AdamConfig::default()
        };
        assert!(AdamState::new(bad, 1).is_err());
        let mut s = AdamState::new(AdamConfig::default(), 2).unwrap();
        assert!(s.step_flat(&mut [0.0], &[0.0]).is_err());
    }
}
