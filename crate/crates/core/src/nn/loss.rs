use alloc::vec::Vec;

use super::{check_len, NnError};
use crate::tensor::Tensor2;

/// Probabilities below this are clamped before taking the log in [`sequence_cross_entropy`].
pub const LOG_CLAMP_EPS: f64 = 1e-12;

/// Mean squared error and its gradient `2(pred − target)/n`.
pub fn mse_loss(pred: &Tensor2, target: &Tensor2) -> Result<(f64, Tensor2), NnError> {
    check_len("mse rows", target.rows(), pred.rows())?;
    check_len("mse cols", target.cols(), pred.cols())?;
    let n = pred.data().len();
    if n == 0 {
        return Err(NnError::EmptyInput("mse"));
    }
    let mut grad = Tensor2::zeros(pred.rows(), pred.cols());
    let mut sum = 0.0;
    for ((g, p), t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let d = p - t;
        sum += d * d;
        *g = 2.0 * d / n as f64;
    }
    Ok((sum / n as f64, grad))
}

/// Cascade training loss over `N` sequences of `T` steps and `C` classes:
///
/// `L = −(1/N) Σ_i Σ_t log p_{i,t,y_{i,t}}`
///
/// The sum runs over time steps but is normalised by the number of sequences only, so the
/// value grows with `T`. `labels` are 1-based class ids. The log argument is clamped at
/// [`LOG_CLAMP_EPS`].
pub fn sequence_cross_entropy(probs: &[Tensor2], labels: &[Vec<usize>]) -> Result<f64, NnError> {
    check_len("cross-entropy samples", probs.len(), labels.len())?;
    if probs.is_empty() {
        return Err(NnError::EmptyInput("cross-entropy"));
    }
    let mut total = 0.0;
    for (p, y) in probs.iter().zip(labels) {
        check_len("cross-entropy steps", p.rows(), y.len())?;
        for (t, &label) in y.iter().enumerate() {
            if label == 0 || label > p.cols() {
                return Err(NnError::LabelOutOfRange {
                    label,
                    classes: p.cols(),
                });
            }
            total -= libm::log(p.get(t, label - 1).max(LOG_CLAMP_EPS));
        }
    }
    Ok(total / probs.len() as f64)
}
