//! The three-task cascade.
//!
//! 1. Change-point segments propose regions of interest (mask `O_t1`).
//! 2. A two-layer LSTM with a two-way head scores steps inside those regions as anomalous
//!    (`O_t2`).
//! 3. A two-layer LSTM with a twelve-way head labels every step from `X ⊕ O_t1 ⊕ O_t2`.
//!
//! The segment classifier enters Task 3 as a fixed additive logit offset on the steps of
//! each proposed segment that Task 2 flags, derived from its class distribution there; see
//! [`PriorConfig`].

mod pipeline;
mod stages;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use pipeline::{
    infer_with_flags, smtcnn_infer, smtcnn_train_full, train_cascade_heads, CascadeModels, CascadePrediction, TrainedHeads,
};
pub use stages::{
    chunk_ranges, prior_regions, segclass_prior, task1_from_flags, task1_propose, task2_score, task3_forward, task3_input,
    train_task2, train_task3, Task2Model, Task3Model, ANOMALY_LABEL, NORMAL_LABEL,
};

use crate::changepoint::{ChangePointError, DetectorConfig};
use crate::nn::{AdamConfig, EarlyStopConfig, NnError, TrainConfig};
use crate::segclass::{ClassifierConfig, ClassifierKind, SegClassError};
use crate::sim::Regime;
use crate::tensor::Tensor2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CascadeError {
    #[error("no proposed segments; Task 2 has nothing to train on")]
    NoSegments,
    #[error("{what}: expected length {expected}, found {found}")]
    Misaligned { what: &'static str, expected: usize, found: usize },
    #[error("{what} must lie in {range}")]
    OutOfRange { what: &'static str, range: &'static str },
    #[error("expected a {expected} dataset, got {found}")]
    Regime { expected: &'static str, found: &'static str },
    #[error("change-point stage: {0}")]
    ChangePoint(#[from] ChangePointError),
    #[error("segment classifier: {0}")]
    SegClass(#[from] SegClassError),
    #[error("network: {0}")]
    Nn(#[from] NnError),
    #[error("{0}")]
    Other(String),
}

pub(crate) fn require_regime(found: Regime, expected: Regime) -> Result<(), CascadeError> {
    if found == expected {
        Ok(())
    } else {
        Err(CascadeError::Regime {
            expected: expected.name(),
            found: found.name(),
        })
    }
}

/// Pipeline variant: the full cascade or one of the two ablations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    /// No change-point masking: `O_t1` is all ones.
    #[serde(rename = "b2", alias = "b2_no_cpd")]
    B2NoCpd,
    /// No segment-classifier prior in Task 3.
    #[serde(rename = "b3", alias = "b3_no_segclass")]
    B3NoSegclass,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Full, Variant::B2NoCpd, Variant::B3NoSegclass];

    pub fn short_name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::B2NoCpd => "b2",
            Variant::B3NoSegclass => "b3",
        }
    }

    pub fn from_short_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.short_name() == s)
    }

    /// Row label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Variant::Full => "SMTCNN",
            Variant::B2NoCpd => "B2 (no segmentation)",
            Variant::B3NoSegclass => "B3 (no segment classifier)",
        }
    }

    pub fn uses_changepoints(self) -> bool {
        self != Variant::B2NoCpd
    }

    pub fn uses_segclass(self) -> bool {
        self != Variant::B3NoSegclass
    }
}

/// Per-step inputs of Task 3.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeInputs {
    /// Raw `T×3` features.
    pub x: Tensor2,
    /// `O_t1`, 0 or 1 per step.
    pub mask: Vec<f64>,
    /// `O_t2`, anomaly probability per step.
    pub o2: Vec<f64>,
}

impl CascadeInputs {
    pub fn new(x: Tensor2, mask: Vec<f64>, o2: Vec<f64>) -> Result<Self, CascadeError> {
        let t = x.rows();
        for (what, v) in [("O_t1", &mask), ("O_t2", &o2)] {
            if v.len() != t {
                return Err(CascadeError::Misaligned {
                    what,
                    expected: t,
                    found: v.len(),
                });
            }
        }
        if mask.iter().any(|&m| m != 0.0 && m != 1.0) {
            return Err(CascadeError::OutOfRange {
                what: "O_t1",
                range: "{0, 1}",
            });
        }
        if o2.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CascadeError::OutOfRange {
                what: "O_t2",
                range: "[0, 1]",
            });
        }
        Ok(Self { x, mask, o2 })
    }

    /// Inputs with `O_t1 = 0` and `O_t2 = 0`.
    pub fn bare(x: Tensor2) -> Self {
        let t = x.rows();
        Self {
            x,
            mask: vec![0.0; t],
            o2: vec![0.0; t],
        }
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }
}

/// Training setup shared by Task 2 and Task 3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageConfig {
    /// Hidden size of each stacked LSTM layer.
    pub hidden: Vec<usize>,
    /// Length of the training and inference chunks.
    pub chunk_len: usize,
    /// Upper bound on training chunks.
    pub max_chunks: usize,
    /// Share of chunks held out for early stopping.
    pub val_fraction: f64,
    /// Extra copies of each training chunk. Task 2 permutes and sign-flips
    /// the channels; Task 3 permutes fault ids together with the prior and
    /// only does so when a prior is given.
    #[serde(default)]
    pub augment: usize,
    pub train: TrainConfig,
}

impl Default for StageConfig {
    fn default() -> Self {
        Self {
            hidden: vec![32, 32],
            chunk_len: 64,
            max_chunks: 96,
            val_fraction: 0.15,
            augment: 0,
            train: TrainConfig {
                max_epochs: 60,
                batch_size: 8,
                adam: AdamConfig::with_alpha(3e-3),
                early_stop: Some(EarlyStopConfig {
                    patience: 8,
                    min_delta: 0.0,
                    restore_best: true,
                }),
                seed: 0,
            },
        }
    }
}

/// Where Task 2 is trained and scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task2Scope {
    /// Only inside proposed segments; other steps get `O_t2 = 0`.
    Segments,
    /// The whole series.
    FullSeries,
}

/// How segment-classifier output becomes a Task 3 logit offset.
///
/// The classifier labels each region of consecutive steps inside a proposed segment whose
/// `O_t2` exceeds `threshold` (regions closer than `merge_gap` are joined). Its class
/// distribution `p`, averaged over the feature windows of the region, gives every step of
/// the region the offset `strength · ln(11 · max(p_c, floor))` for fault class `c`. A uniform
/// distribution gives zero offset. Class 12 and steps outside regions get zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorConfig {
    pub strength: f64,
    pub floor: f64,
    pub threshold: f64,
    pub merge_gap: usize,
    /// Feature window and stride, as used to train the classifier.
    pub window: usize,
    pub stride: usize,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            strength: 2.0,
            floor: 1e-2,
            threshold: 0.5,
            merge_gap: 4,
            window: 16,
            stride: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeConfig {
    pub detector: DetectorConfig,
    pub segclass: ClassifierConfig,
    pub prior: PriorConfig,
    pub task2: StageConfig,
    pub task2_scope: Task2Scope,
    pub task3: StageConfig,
    /// Background (mask-free) Task 3 chunks per mask chunk.
    pub background_ratio: f64,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            detector: DetectorConfig::default(),
            segclass: ClassifierConfig::for_kind(ClassifierKind::RandomForest),
            prior: PriorConfig::default(),
            task2: StageConfig {
                augment: 3,
                ..StageConfig::default()
            },
            task2_scope: Task2Scope::Segments,
            task3: StageConfig {
                augment: 2,
                ..StageConfig::default()
            },
            background_ratio: 1.0,
        }
    }
}
