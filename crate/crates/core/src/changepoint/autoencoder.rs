use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{require_regime, ChangePointError, ChannelScaler};
use crate::nn::{
    backward_from_logits, final_hidden, lstm_layer_backward, lstm_layer_forward_traced, run_constant_input,
    train, Activation, AdamConfig, DenseParams, EarlyStopConfig, EpochStats, LstmCellParams, NnError, Objective,
    Parameters, TrainConfig,
};
use crate::sim::{Regime, TimeSeriesDataset};
use crate::tensor::Tensor2;

/// Per-channel LSTM encoders whose final states are concatenated and repeated as the input
/// of an LSTM decoder; a linear head maps decoder states back to the channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderModel {
    pub encoders: Vec<LstmCellParams>,
    pub decoder: LstmCellParams,
    pub output: DenseParams,
    pub window: usize,
    pub channels: usize,
    pub scaler: ChannelScaler,
}

impl AutoencoderModel {
    pub fn new<R: rand::Rng + ?Sized>(
        scaler: ChannelScaler,
        window: usize,
        encoder_hidden: usize,
        decoder_hidden: usize,
        rng: &mut R,
    ) -> Self {
        let channels = scaler.channels();
        let encoders = (0..channels)
            .map(|_| LstmCellParams::init(1, encoder_hidden, rng))
            .collect();
        let decoder = LstmCellParams::init(channels * encoder_hidden, decoder_hidden, rng);
        let output = DenseParams::init(decoder_hidden, channels, Activation::Identity, rng);
        Self {
            encoders,
            decoder,
            output,
            window,
            channels,
            scaler,
        }
    }

    /// All weights zero: reconstructs every window as the training mean.
    pub fn zeros(scaler: ChannelScaler, window: usize, encoder_hidden: usize, decoder_hidden: usize) -> Self {
        let channels = scaler.channels();
        Self {
            encoders: (0..channels).map(|_| LstmCellParams::zeros(1, encoder_hidden)).collect(),
            decoder: LstmCellParams::zeros(channels * encoder_hidden, decoder_hidden),
            output: DenseParams::zeros(decoder_hidden, channels, Activation::Identity),
            window,
            channels,
            scaler,
        }
    }

    pub fn latent_size(&self) -> usize {
        self.encoders.iter().map(|e| e.hidden_size).sum()
    }

    fn encode(&self, window: &[f64]) -> Vec<f64> {
        let c = self.channels;
        let mut z = Vec::with_capacity(self.latent_size());
        for (ch, enc) in self.encoders.iter().enumerate() {
            let inputs = (0..self.window).map(|t| core::slice::from_ref(&window[t * c + ch]));
            z.extend(final_hidden(enc, inputs));
        }
        z
    }

    /// Reconstruction of one standardised `W×C` window (row-major slice).
    pub fn reconstruct(&self, window: &[f64]) -> Tensor2 {
        let z = self.encode(window);
        let mut out = Tensor2::zeros(self.window, self.channels);
        run_constant_input(&self.decoder, &z, self.window, |t, h| self.output.logits(h, out.row_mut(t)));
        out
    }

    /// MSE between a standardised window and its reconstruction.
    pub fn window_error(&self, window: &[f64]) -> f64 {
        let z = self.encode(window);
        let c = self.channels;
        let mut y = vec![0.0; c];
        let mut sum = 0.0;
        run_constant_input(&self.decoder, &z, self.window, |t, h| {
            self.output.logits(h, &mut y);
            for (a, b) in y.iter().zip(&window[t * c..(t + 1) * c]) {
                sum += (a - b) * (a - b);
            }
        });
        sum / (self.window * c) as f64
    }

    /// Adds `scale · ∂MSE/∂θ` for one standardised window into `grads`; returns the MSE.
    pub fn accumulate_gradient(&self, window: &Tensor2, scale: f64, grads: &mut Self) -> f64 {
        let w = self.window;
        let c = self.channels;
        let mut enc_traces = Vec::with_capacity(c);
        let mut z = Vec::with_capacity(self.latent_size());
        for (ch, enc) in self.encoders.iter().enumerate() {
            let col = Tensor2::from_vec(w, 1, (0..w).map(|t| window.get(t, ch)).collect())
                .expect("finite standardised window");
            let (hs, trace) = lstm_layer_forward_traced(&col, enc);
            z.extend_from_slice(hs.row(w - 1));
            enc_traces.push(trace);
        }
        let mut dec_in = Tensor2::zeros(w, z.len());
        for t in 0..w {
            dec_in.row_mut(t).copy_from_slice(&z);
        }
        let (dec_h, dec_trace) = lstm_layer_forward_traced(&dec_in, &self.decoder);

        let n = (w * c) as f64;
        let mut loss = 0.0;
        let mut y = vec![0.0; c];
        let mut d_dec_h = Tensor2::zeros(w, dec_h.cols());
        for t in 0..w {
            self.output.logits(dec_h.row(t), &mut y);
            for (yi, xi) in y.iter_mut().zip(window.row(t)) {
                let d = *yi - xi;
                loss += d * d;
                *yi = 2.0 * d / n * scale;
            }
            let dh = backward_from_logits(&self.output, dec_h.row(t), &y, &mut grads.output);
            d_dec_h.row_mut(t).copy_from_slice(&dh);
        }
        let d_dec_in = lstm_layer_backward(&self.decoder, &dec_trace, &d_dec_h, &mut grads.decoder);
        let mut dz = vec![0.0; z.len()];
        for t in 0..w {
            for (a, b) in dz.iter_mut().zip(d_dec_in.row(t)) {
                *a += b;
            }
        }
        let mut offset = 0;
        for (ch, enc) in self.encoders.iter().enumerate() {
            let hs = enc.hidden_size;
            let mut d_h = Tensor2::zeros(w, hs);
            d_h.row_mut(w - 1).copy_from_slice(&dz[offset..offset + hs]);
            lstm_layer_backward(enc, &enc_traces[ch], &d_h, &mut grads.encoders[ch]);
            offset += hs;
        }
        loss / n
    }
}

impl Parameters for AutoencoderModel {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        for e in &self.encoders {
            e.visit(f);
        }
        self.decoder.visit(f);
        self.output.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        for e in &mut self.encoders {
            e.visit_mut(f);
        }
        self.decoder.visit_mut(f);
        self.output.visit_mut(f);
    }

    fn zeros_like(&self) -> Self {
        Self {
            encoders: self.encoders.iter().map(|e| e.zeros_like()).collect(),
            decoder: self.decoder.zeros_like(),
            output: self.output.zeros_like(),
            window: self.window,
            channels: self.channels,
            scaler: self.scaler.clone(),
        }
    }
}

/// Standardised training/validation windows.
#[derive(Clone, Debug, Default)]
pub struct AutoencoderObjective {
    pub train: Vec<Tensor2>,
    pub val: Vec<Tensor2>,
}

impl Objective for AutoencoderObjective {
    type Model = AutoencoderModel;

    fn train_len(&self) -> usize {
        self.train.len()
    }

    fn val_len(&self) -> usize {
        self.val.len()
    }

    fn batch_loss_grad(&self, model: &AutoencoderModel, batch: &[usize]) -> (f64, AutoencoderModel) {
        let mut grads = model.zeros_like();
        let scale = 1.0 / batch.len().max(1) as f64;
        let loss: f64 = batch
            .iter()
            .map(|&i| model.accumulate_gradient(&self.train[i], scale, &mut grads))
            .sum();
        (loss * scale, grads)
    }

    fn val_loss(&self, model: &AutoencoderModel) -> f64 {
        let total: f64 = self.val.iter().map(|w| model.window_error(w.data())).sum();
        total / self.val.len().max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderConfig {
    /// Sliding-window length in records.
    pub window: usize,
    pub encoder_hidden: usize,
    pub decoder_hidden: usize,
    /// Stride between training windows.
    pub train_stride: usize,
    pub max_train_windows: usize,
    pub max_val_windows: usize,
    /// Trailing fraction of the series used for validation windows.
    pub val_fraction: f64,
    pub train: TrainConfig,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        Self {
            window: 32,
            encoder_hidden: 8,
            decoder_hidden: 16,
            train_stride: 4,
            max_train_windows: 768,
            max_val_windows: 96,
            val_fraction: 0.1,
            train: TrainConfig {
                max_epochs: 25,
                batch_size: 16,
                adam: AdamConfig::with_alpha(3e-3),
                early_stop: Some(EarlyStopConfig {
                    patience: 4,
                    min_delta: 0.0,
                    restore_best: true,
                }),
                seed: 0,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct AutoencoderFit {
    pub model: AutoencoderModel,
    pub history: Vec<EpochStats>,
    pub best_epoch: Option<usize>,
}

/// Trains on a normal-only dataset.
pub fn train_autoencoder(normal: &TimeSeriesDataset, cfg: &AutoencoderConfig) -> Result<AutoencoderFit, ChangePointError> {
    require_regime(normal, Regime::NormalOnly)?;
    train_autoencoder_on(&normal.features(), cfg)
}

fn thin<T: Clone>(v: Vec<T>, max: usize) -> Vec<T> {
    if v.len() <= max || max == 0 {
        return v;
    }
    (0..max).map(|i| v[i * v.len() / max].clone()).collect()
}

/// Trains on a raw `T×C` feature matrix assumed to be fault-free.
pub fn train_autoencoder_on(features: &Tensor2, cfg: &AutoencoderConfig) -> Result<AutoencoderFit, ChangePointError> {
    let w = cfg.window;
    let len = features.rows();
    if w == 0 {
        return Err(NnError::Config("window must be positive").into());
    }
    if len < w {
        return Err(ChangePointError::TooShort { len, window: w });
    }
    let scaler = ChannelScaler::fit(features);
    let x = scaler.transform(features);
    let stride = cfg.train_stride.max(1);
    let split = ((len as f64) * (1.0 - cfg.val_fraction)) as usize;
    let windows = |from: usize, to: usize| -> Vec<Tensor2> {
        if to < from + w {
            return Vec::new();
        }
        (from..=to - w).step_by(stride).map(|s| x.slice_rows(s, s + w)).collect()
    };
    let mut train_w = windows(0, split);
    let mut val_w = windows(split, len);
    if train_w.is_empty() {
        train_w = windows(0, len);
    }
    if val_w.is_empty() {
        val_w = thin(train_w.clone(), cfg.max_val_windows.max(1));
    }
    let objective = AutoencoderObjective {
        train: thin(train_w, cfg.max_train_windows),
        val: thin(val_w, cfg.max_val_windows),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed ^ 0xae00_0000);
    let model = AutoencoderModel::new(scaler, w, cfg.encoder_hidden, cfg.decoder_hidden, &mut rng);
    let out = train(model, &objective, &cfg.train)?;
    Ok(AutoencoderFit {
        model: out.model,
        history: out.history,
        best_epoch: out.best_epoch,
    })
}

/// Window MSE for every stride-1 window position; `T − W + 1` values.
pub fn reconstruction_errors(model: &AutoencoderModel, features: &Tensor2) -> Result<Vec<f64>, ChangePointError> {
    if features.cols() != model.channels {
        return Err(NnError::Shape {
            what: "autoencoder channels",
            expected: model.channels,
            found: features.cols(),
        }
        .into());
    }
    let w = model.window;
    if features.rows() < w {
        return Err(ChangePointError::TooShort {
            len: features.rows(),
            window: w,
        });
    }
    let x = model.scaler.transform(features);
    let c = model.channels;
    Ok((0..=x.rows() - w)
        .map(|i| model.window_error(&x.data()[i * c..(i + w) * c]))
        .collect())
}
