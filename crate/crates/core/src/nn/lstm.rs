use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_len, sigmoid, uniform_init, NnError, Parameters};
use crate::tensor::Tensor2;

/// Weights of one LSTM cell. Gate blocks are stacked as `[input, forget, candidate, output]`,
/// each `hidden_size` rows tall.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmCellParams {
    pub w_input: Tensor2,
    pub w_hidden: Tensor2,
    pub bias: Vec<f64>,
    pub hidden_size: usize,
}

impl LstmCellParams {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            w_input: Tensor2::zeros(4 * hidden_size, input_size),
            w_hidden: Tensor2::zeros(4 * hidden_size, hidden_size),
            bias: vec![0.0; 4 * hidden_size],
            hidden_size,
        }
    }

    pub fn init<R: Rng + ?Sized>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_size, hidden_size);
        let fan_in = input_size + hidden_size;
        uniform_init(p.w_input.data_mut(), fan_in, rng);
        uniform_init(p.w_hidden.data_mut(), fan_in, rng);
        uniform_init(&mut p.bias, fan_in, rng);
        p
    }

    pub fn input_size(&self) -> usize {
        self.w_input.cols()
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let h = self.hidden_size;
        check_len("lstm w_input rows", 4 * h, self.w_input.rows())?;
        check_len("lstm w_hidden rows", 4 * h, self.w_hidden.rows())?;
        check_len("lstm w_hidden cols", h, self.w_hidden.cols())?;
        check_len("lstm bias", 4 * h, self.bias.len())
    }
}

impl Parameters for LstmCellParams {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.w_input.data());
        f(self.w_hidden.data());
        f(&self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.w_input.data_mut());
        f(self.w_hidden.data_mut());
        f(&mut self.bias);
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.input_size(), self.hidden_size)
    }
}

/// Values saved by a forward step for backpropagation.
#[derive(Clone, Debug)]
pub struct CellCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Gate activations `[i, f, g, o]`, `4H` long.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

/// Unchecked step; writes activated gates into `gates` (4H) and the new state into `h`, `c`.
#[inline]
pub(crate) fn cell_step(
    p: &LstmCellParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    gates: &mut [f64],
    h: &mut [f64],
    c: &mut [f64],
    tanh_c: &mut [f64],
) {
    let hs = p.hidden_size;
    gates.copy_from_slice(&p.bias);
    p.w_input.matvec_acc(x, gates);
    p.w_hidden.matvec_acc(h_prev, gates);
    for k in 0..hs {
        let i = sigmoid(gates[k]);
        let f = sigmoid(gates[hs + k]);
        let g = libm::tanh(gates[2 * hs + k]);
        let o = sigmoid(gates[3 * hs + k]);
        gates[k] = i;
        gates[hs + k] = f;
        gates[2 * hs + k] = g;
        gates[3 * hs + k] = o;
        c[k] = f * c_prev[k] + i * g;
        tanh_c[k] = libm::tanh(c[k]);
        h[k] = o * tanh_c[k];
    }
}

pub(crate) fn cell_step_cached(p: &LstmCellParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> CellCache {
    let hs = p.hidden_size;
    let mut cache = CellCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        gates: vec![0.0; 4 * hs],
        c: vec![0.0; hs],
        tanh_c: vec![0.0; hs],
        h: vec![0.0; hs],
    };
    cell_step(
        p,
        x,
        h_prev,
        c_prev,
        &mut cache.gates,
        &mut cache.h,
        &mut cache.c,
        &mut cache.tanh_c,
    );
    cache
}

/// One LSTM step: sigmoid input/forget/output gates, tanh candidate.
pub fn lstm_cell_forward(
    x: &[f64],
    h: &[f64],
    c: &[f64],
    p: &LstmCellParams,
) -> Result<(Vec<f64>, Vec<f64>), NnError> {
    p.validate()?;
    check_len("lstm input", p.input_size(), x.len())?;
    check_len("lstm hidden state", p.hidden_size, h.len())?;
    check_len("lstm cell state", p.hidden_size, c.len())?;
    let cache = cell_step_cached(p, x, h, c);
    Ok((cache.h, cache.c))
}

/// Backward through one step.
///
/// `dh`, `dc` are the gradients flowing into this step's outputs. Parameter gradients are
/// accumulated into `grads`; returns `(dx, dh_prev, dc_prev)`.
pub fn lstm_cell_backward(
    p: &LstmCellParams,
    cache: &CellCache,
    dh: &[f64],
    dc: &[f64],
    grads: &mut LstmCellParams,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hs = p.hidden_size;
    let mut dz = vec![0.0; 4 * hs];
    let mut dc_prev = vec![0.0; hs];
    for k in 0..hs {
        let i = cache.gates[k];
        let f = cache.gates[hs + k];
        let g = cache.gates[2 * hs + k];
        let o = cache.gates[3 * hs + k];
        let tc = cache.tanh_c[k];
        let d_o = dh[k] * tc;
        let dct = dc[k] + dh[k] * o * (1.0 - tc * tc);
        let d_i = dct * g;
        let d_g = dct * i;
        let d_f = dct * cache.c_prev[k];
        dc_prev[k] = dct * f;
        dz[k] = d_i * i * (1.0 - i);
        dz[hs + k] = d_f * f * (1.0 - f);
        dz[2 * hs + k] = d_g * (1.0 - g * g);
        dz[3 * hs + k] = d_o * o * (1.0 - o);
    }
    grads.w_input.add_outer(&dz, &cache.x);
    grads.w_hidden.add_outer(&dz, &cache.h_prev);
    for (b, d) in grads.bias.iter_mut().zip(&dz) {
        *b += d;
    }
    let mut dx = vec![0.0; p.input_size()];
    p.w_input.matvec_t_acc(&dz, &mut dx);
    let mut dh_prev = vec![0.0; hs];
    p.w_hidden.matvec_t_acc(&dz, &mut dh_prev);
    (dx, dh_prev, dc_prev)
}

/// Per-step caches of a layer forward pass.
#[derive(Clone, Debug, Default)]
pub struct LayerTrace {
    pub steps: Vec<CellCache>,
}

/// Runs the cell over every row of `seq`; row `t` of the result is `h_t`.
pub fn lstm_layer_forward(
    seq: &Tensor2,
    p: &LstmCellParams,
    h0: &[f64],
    c0: &[f64],
) -> Result<Tensor2, NnError> {
    if seq.rows() == 0 {
        return Err(NnError::EmptyInput("lstm sequence"));
    }
    p.validate()?;
    check_len("lstm input", p.input_size(), seq.cols())?;
    check_len("lstm h0", p.hidden_size, h0.len())?;
    check_len("lstm c0", p.hidden_size, c0.len())?;
    Ok(layer_forward_fast(seq, p, h0, c0))
}

/// Inference-only forward pass without caches.
pub(crate) fn layer_forward_fast(seq: &Tensor2, p: &LstmCellParams, h0: &[f64], c0: &[f64]) -> Tensor2 {
    let hs = p.hidden_size;
    let mut out = Tensor2::zeros(seq.rows(), hs);
    let mut h = h0.to_vec();
    let mut c = c0.to_vec();
    let mut c_next = vec![0.0; hs];
    let mut gates = vec![0.0; 4 * hs];
    let mut tanh_c = vec![0.0; hs];
    for t in 0..seq.rows() {
        let h_next = out.row_mut(t);
        cell_step(p, seq.row(t), &h, &c, &mut gates, h_next, &mut c_next, &mut tanh_c);
        h.copy_from_slice(h_next);
        core::mem::swap(&mut c, &mut c_next);
    }
    out
}

/// Runs the cell from a zero state on one scalar-or-vector input per step and returns the
/// final hidden state.
pub(crate) fn final_hidden<'a, I>(p: &LstmCellParams, inputs: I) -> Vec<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let hs = p.hidden_size;
    let mut h = vec![0.0; hs];
    let mut h_next = vec![0.0; hs];
    let mut c = vec![0.0; hs];
    let mut c_next = vec![0.0; hs];
    let mut gates = vec![0.0; 4 * hs];
    let mut tanh_c = vec![0.0; hs];
    for x in inputs {
        cell_step(p, x, &h, &c, &mut gates, &mut h_next, &mut c_next, &mut tanh_c);
        core::mem::swap(&mut h, &mut h_next);
        core::mem::swap(&mut c, &mut c_next);
    }
    h
}

/// Runs `steps` cell updates from a zero state with the same input `x` at every step,
/// computing `W_input·x` once. Calls `visit(t, h_t)` after each step.
pub(crate) fn run_constant_input(
    p: &LstmCellParams,
    x: &[f64],
    steps: usize,
    mut visit: impl FnMut(usize, &[f64]),
) {
    let hs = p.hidden_size;
    let mut base = p.bias.clone();
    p.w_input.matvec_acc(x, &mut base);
    let mut h = vec![0.0; hs];
    let mut c = vec![0.0; hs];
    let mut z = vec![0.0; 4 * hs];
    for t in 0..steps {
        z.copy_from_slice(&base);
        p.w_hidden.matvec_acc(&h, &mut z);
        for k in 0..hs {
            let i = sigmoid(z[k]);
            let f = sigmoid(z[hs + k]);
            let g = libm::tanh(z[2 * hs + k]);
            let o = sigmoid(z[3 * hs + k]);
            c[k] = f * c[k] + i * g;
            h[k] = o * libm::tanh(c[k]);
        }
        visit(t, &h);
    }
}

/// Forward pass from a zero state that keeps caches for [`lstm_layer_backward`].
pub fn lstm_layer_forward_traced(seq: &Tensor2, p: &LstmCellParams) -> (Tensor2, LayerTrace) {
    let hs = p.hidden_size;
    let mut out = Tensor2::zeros(seq.rows(), hs);
    let mut trace = LayerTrace {
        steps: Vec::with_capacity(seq.rows()),
    };
    let mut h = vec![0.0; hs];
    let mut c = vec![0.0; hs];
    for t in 0..seq.rows() {
        let cache = cell_step_cached(p, seq.row(t), &h, &c);
        out.row_mut(t).copy_from_slice(&cache.h);
        h.copy_from_slice(&cache.h);
        c.copy_from_slice(&cache.c);
        trace.steps.push(cache);
    }
    (out, trace)
}

/// Backpropagation through time. `d_hidden` holds `∂L/∂h_t` per row; returns `∂L/∂x_t`.
pub fn lstm_layer_backward(
    p: &LstmCellParams,
    trace: &LayerTrace,
    d_hidden: &Tensor2,
    grads: &mut LstmCellParams,
) -> Tensor2 {
    let hs = p.hidden_size;
    let mut dx = Tensor2::zeros(trace.steps.len(), p.input_size());
    let mut dh_next = vec![0.0; hs];
    let mut dc_next = vec![0.0; hs];
    for (t, cache) in trace.steps.iter().enumerate().rev() {
        let dh: Vec<f64> = d_hidden.row(t).iter().zip(&dh_next).map(|(a, b)| a + b).collect();
        let (dxt, dhp, dcp) = lstm_cell_backward(p, cache, &dh, &dc_next, grads);
        dx.row_mut(t).copy_from_slice(&dxt);
        dh_next = dhp;
        dc_next = dcp;
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradient_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_zero_state_stays_zero() {
        let p = LstmCellParams::zeros(3, 4);
        let (h, c) = lstm_cell_forward(&[0.0; 3], &[0.0; 4], &[0.0; 4], &p).unwrap();
        assert_eq!(h, vec![0.0; 4]);
        assert_eq!(c, vec![0.0; 4]);
    }

    #[test]
    fn zero_params_halves_cell_state() {
        // gates are all sigmoid(0) = 0.5 and the candidate is tanh(0) = 0
        let p = LstmCellParams::zeros(2, 3);
        let c0 = [1.0, -2.0, 0.25];
        let (h, c) = lstm_cell_forward(&[0.7, -0.3], &[0.0; 3], &c0, &p).unwrap();
        for k in 0..3 {
            let expect_c = 0.5 * c0[k];
            assert!((c[k] - expect_c).abs() < 1e-15);
            assert!((h[k] - 0.5 * libm::tanh(expect_c)).abs() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = LstmCellParams::zeros(2, 3);
        assert!(matches!(
            lstm_cell_forward(&[0.0; 3], &[0.0; 3], &[0.0; 3], &p),
            Err(NnError::Shape { .. })
        ));
        assert!(lstm_cell_forward(&[0.0; 2], &[0.0; 2], &[0.0; 3], &p).is_err());
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let p = LstmCellParams::zeros(2, 3);
        let seq = Tensor2::zeros(0, 2);
        assert_eq!(
            lstm_layer_forward(&seq, &p, &[0.0; 3], &[0.0; 3]),
            Err(NnError::EmptyInput("lstm sequence"))
        );
    }

    #[test]
    fn single_step_layer_equals_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = LstmCellParams::init(2, 3, &mut rng);
        let seq = Tensor2::from_rows(&[[0.4, -1.1]]).unwrap();
        let out = lstm_layer_forward(&seq, &p, &[0.0; 3], &[0.0; 3]).unwrap();
        let (h, _) = lstm_cell_forward(&[0.4, -1.1], &[0.0; 3], &[0.0; 3], &p).unwrap();
        assert_eq!(out.row(0), &h[..]);
    }

    #[test]
    fn zero_params_any_sequence_gives_zero_hidden() {
        let p = LstmCellParams::zeros(2, 5);
        let seq = Tensor2::from_rows(&[[1.0, 2.0], [-3.0, 0.5], [9.0, 9.0]]).unwrap();
        let out = lstm_layer_forward(&seq, &p, &[0.0; 5], &[0.0; 5]).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn prefix_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = LstmCellParams::init(3, 4, &mut rng);
        let rows: Vec<[f64; 3]> = (0..9)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let seq = Tensor2::from_rows(&rows).unwrap();
        let full = lstm_layer_forward(&seq, &p, &[0.0; 4], &[0.0; 4]).unwrap();
        for k in 1..=9 {
            let part = lstm_layer_forward(&seq.slice_rows(0, k), &p, &[0.0; 4], &[0.0; 4]).unwrap();
            assert_eq!(part.data(), &full.data()[..k * 4]);
        }
        let (traced, _) = lstm_layer_forward_traced(&seq, &p);
        assert_eq!(traced, full);
    }

    #[test]
    fn single_weight_perturbation_matches_gradient() {
        // perturb each input weight by ±1e-5 and compare with the analytic gradient of Σ h + Σ c
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = LstmCellParams::init(3, 2, &mut rng);
        let x = [0.3, -0.8, 1.2];
        let h0 = [0.1, -0.2];
        let c0 = [0.5, 0.05];
        let loss = |q: &LstmCellParams| {
            let (h, c) = lstm_cell_forward(&x, &h0, &c0, q).unwrap();
            h.iter().sum::<f64>() + c.iter().sum::<f64>()
        };
        let cache = cell_step_cached(&p, &x, &h0, &c0);
        let mut grads = p.zeros_like();
        lstm_cell_backward(&p, &cache, &[1.0, 1.0], &[1.0, 1.0], &mut grads);
        let report = gradient_check(&p, &grads, 1e-5, loss);
        assert!(report.max_rel_error < 1e-4, "{report:?}");
    }
}
