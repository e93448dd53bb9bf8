//! Unsupervised change-point detection.
//!
//! An LSTM autoencoder (one encoder per channel, a joint decoder) is fitted to fault-free
//! telemetry. Sliding windows whose reconstruction error exceeds `τ = μ + k·σ` of the
//! training errors are change-points, and runs of them become candidate segments.

mod autoencoder;
mod scaler;
mod segments;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use autoencoder::{
    reconstruction_errors, train_autoencoder, train_autoencoder_on, AutoencoderConfig, AutoencoderFit,
    AutoencoderModel, AutoencoderObjective,
};
pub use scaler::ChannelScaler;
pub use segments::{
    compute_threshold, detect_changepoints, flags_to_segments, segments_to_mask, Segment, SegmentationParams,
    ThresholdSpec,
};

use crate::nn::NnError;
use crate::sim::{Regime, TimeSeriesDataset};
use crate::tensor::Tensor2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChangePointError {
    #[error("series of {len} steps is shorter than the {window}-step window")]
    TooShort { len: usize, window: usize },
    #[error("expected a {expected} dataset, got {found}")]
    RegimeMismatch { expected: &'static str, found: &'static str },
    #[error("cannot compute a threshold from an empty error sequence")]
    EmptyErrors,
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub autoencoder: AutoencoderConfig,
    /// Threshold multiplier `k` in `τ = μ + k·σ`.
    pub k: f64,
    pub segmentation: SegmentationParams,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            autoencoder: AutoencoderConfig::default(),
            k: 3.0,
            segmentation: SegmentationParams::default(),
        }
    }
}

/// A trained autoencoder with its frozen threshold and segmentation rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePointDetector {
    pub model: AutoencoderModel,
    pub threshold: ThresholdSpec,
    pub segmentation: SegmentationParams,
}

impl ChangePointDetector {
    /// Trains on normal-only data and fixes `τ` from the errors on that same series.
    pub fn fit(normal: &TimeSeriesDataset, cfg: &DetectorConfig) -> Result<(Self, AutoencoderFit), ChangePointError> {
        let fit = train_autoencoder(normal, &cfg.autoencoder)?;
        let errors = reconstruction_errors(&fit.model, &normal.features())?;
        let threshold = compute_threshold(&errors, cfg.k)?;
        let det = Self {
            model: fit.model.clone(),
            threshold,
            segmentation: cfg.segmentation,
        };
        Ok((det, fit))
    }

    pub fn window(&self) -> usize {
        self.model.window
    }

    /// Change-point flag per window position.
    pub fn flags(&self, features: &Tensor2) -> Result<Vec<bool>, ChangePointError> {
        let errors = reconstruction_errors(&self.model, features)?;
        Ok(detect_changepoints(&errors, &self.threshold))
    }

    /// Segments from precomputed window flags.
    pub fn segments_from_flags(&self, flags: &[bool]) -> Vec<Segment> {
        flags_to_segments(flags, self.model.window, self.segmentation.min_gap, self.segmentation.min_len)
    }

    /// Record-index segments of a raw `T×C` feature matrix. Series shorter than one window
    /// produce no segments.
    pub fn segments(&self, features: &Tensor2) -> Result<Vec<Segment>, ChangePointError> {
        if features.rows() < self.model.window {
            return Ok(Vec::new());
        }
        Ok(self.segments_from_flags(&self.flags(features)?))
    }
}

pub(crate) fn require_regime(ds: &TimeSeriesDataset, expected: Regime) -> Result<(), ChangePointError> {
    if ds.regime == expected {
        Ok(())
    } else {
        Err(ChangePointError::RegimeMismatch {
            expected: expected.name(),
            found: ds.regime.name(),
        })
    }
}
