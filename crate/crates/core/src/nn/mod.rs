//! Minimal neural-network numerics: LSTM and dense layers, losses, Adam,
//! an early-stopping training loop and a finite-difference gradient checker.
//!
//! Everything is `f64` and single-threaded. Gradients are carried in a value
//! of the same type as the model (see [`Parameters`]).

mod adam;
mod dense;
mod gradcheck;
mod init;
mod loss;
mod lstm;
mod network;
mod train;

use alloc::vec::Vec;

pub(crate) use dense::backward_from_logits;
pub(crate) use lstm::{final_hidden, run_constant_input};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use dense::{dense_backward, dense_forward, softmax, Activation, DenseParams};
pub use gradcheck::{gradient_check, GradCheckReport};
pub use init::uniform_init;
pub use loss::{mse_loss, sequence_cross_entropy, LOG_CLAMP_EPS};
pub use lstm::{
    lstm_cell_backward, lstm_cell_forward, lstm_layer_backward, lstm_layer_forward,
    lstm_layer_forward_traced, CellCache, LayerTrace, LstmCellParams,
};
pub use network::{SequenceClassifier, SequenceObjective, SequenceSample};
pub use train::{train, EarlyStopConfig, EpochStats, Objective, TrainConfig, TrainOutcome};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("non-finite loss {loss} at epoch {epoch}")]
    NonFiniteLoss { epoch: usize, loss: f64 },
    #[error("label {label} outside 1..={classes}")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), NnError> {
    if expected == found {
        Ok(())
    } else {
        Err(NnError::Shape {
            what,
            expected,
            found,
        })
    }
}

/// Trainable parameter container. Gradients use the same type as the model.
pub trait Parameters {
    fn visit(&self, f: &mut dyn FnMut(&[f64]));
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64]));

    /// A value of the same shape with every parameter set to zero.
    fn zeros_like(&self) -> Self
    where
        Self: Sized;

    fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |s| n += s.len());
        n
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.visit(&mut |s| out.extend_from_slice(s));
        out
    }

    fn assign_flat(&mut self, flat: &[f64]) {
        let mut offset = 0;
        self.visit_mut(&mut |s| {
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        });
    }

    /// `self += other`, elementwise.
    fn accumulate(&mut self, other: &Self)
    where
        Self: Sized,
    {
        let flat = other.flatten();
        let mut offset = 0;
        self.visit_mut(&mut |s| {
            let n = s.len();
            for (a, b) in s.iter_mut().zip(&flat[offset..offset + n]) {
                *a += b;
            }
            offset += n;
        });
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}
