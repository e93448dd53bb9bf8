use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::stages::{
    segclass_prior, task1_from_flags, task1_propose, task2_score, task3_forward, train_task2, train_task3,
    Task2Model, Task3Model,
};
use super::{require_regime, CascadeConfig, CascadeError, CascadeInputs, PriorConfig, Task2Scope, Variant};
use crate::changepoint::{ChangePointDetector, ChannelScaler, Segment};
use crate::segclass::{train_classifier, windowize, ClassifierModel};
use crate::seed::stage_seed;
use crate::sim::{Regime, TimeSeriesDataset, NORMAL_CLASS};
use crate::tensor::Tensor2;

/// Every trained stage of one pipeline variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeModels {
    pub variant: Variant,
    /// Absent for [`Variant::B2NoCpd`].
    pub detector: Option<ChangePointDetector>,
    /// Absent for [`Variant::B3NoSegclass`].
    pub segclass: Option<ClassifierModel>,
    pub prior: PriorConfig,
    pub task2_scope: Task2Scope,
    pub task2: Task2Model,
    pub task3: Task3Model,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadePrediction {
    /// Class per step, 1..=12.
    pub classes: Vec<u8>,
    /// `class != 12`.
    pub anomaly: Vec<bool>,
    /// `1 − p(class 12)`.
    pub p_anomaly: Vec<f64>,
    /// `T×12` distributions.
    pub probs: Tensor2,
    pub segments: Vec<Segment>,
}

/// Task 2 and Task 3 of one variant.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedHeads {
    pub task2: Task2Model,
    pub task3: Task3Model,
}

struct Proposal {
    segments: Vec<Segment>,
    mask: Vec<f64>,
    task2_segments: Vec<Segment>,
}

fn propose(
    variant: Variant,
    detector: Option<&ChangePointDetector>,
    scope: Task2Scope,
    x: &Tensor2,
    flags: Option<&[bool]>,
) -> Result<Proposal, CascadeError> {
    let t = x.rows();
    let whole = || if t == 0 { Vec::new() } else { vec![Segment::new(0, t)] };
    let (segments, mask) = if variant.uses_changepoints() {
        let det = detector.ok_or_else(|| CascadeError::Other("change-point detector missing".to_string()))?;
        match flags {
            Some(f) => task1_from_flags(det, f, t),
            None => task1_propose(x, det)?,
        }
    } else {
        (whole(), vec![1.0; t])
    };
    let task2_segments = match scope {
        Task2Scope::Segments => segments.clone(),
        Task2Scope::FullSeries => whole(),
    };
    Ok(Proposal {
        segments,
        mask,
        task2_segments,
    })
}

fn prior(
    variant: Variant,
    segclass: Option<&ClassifierModel>,
    x: &Tensor2,
    segments: &[Segment],
    o2: &[f64],
    cfg: &PriorConfig,
) -> Result<Option<Tensor2>, CascadeError> {
    if !variant.uses_segclass() {
        return Ok(None);
    }
    let model = segclass.ok_or_else(|| CascadeError::Other("segment classifier missing".to_string()))?;
    Ok(Some(segclass_prior(model, x, segments, Some(o2), cfg)?))
}

/// Trains Task 2 (unless `reuse_task2` is given) and Task 3 on a mixed series.
///
/// `flags`, when given, are the detector's window flags for exactly this series.
#[allow(clippy::too_many_arguments)]
pub fn train_cascade_heads(
    mixed: &TimeSeriesDataset,
    detector: Option<&ChangePointDetector>,
    segclass: Option<&ClassifierModel>,
    scaler: &ChannelScaler,
    flags: Option<&[bool]>,
    cfg: &CascadeConfig,
    variant: Variant,
    reuse_task2: Option<&Task2Model>,
    seed: u64,
) -> Result<TrainedHeads, CascadeError> {
    require_regime(mixed.regime, Regime::Mixed)?;
    let x = mixed.features();
    let p = propose(variant, detector, cfg.task2_scope, &x, flags)?;
    let task2 = match reuse_task2 {
        Some(m) => m.clone(),
        None => train_task2(mixed, &p.task2_segments, scaler, &cfg.task2, stage_seed(seed, "task2"))?,
    };
    let o2 = task2_score(&task2, &x, &p.task2_segments)?;
    let bias = prior(variant, segclass, &x, &p.segments, &o2, &cfg.prior)?;
    let inputs = CascadeInputs::new(x, p.mask, o2)?;
    let task3 = train_task3(
        mixed,
        &inputs,
        bias.as_ref(),
        scaler,
        &cfg.task3,
        cfg.background_ratio,
        stage_seed(seed, "task3"),
    )?;
    Ok(TrainedHeads { task2, task3 })
}

/// Trains every stage: the detector on `normal`, the segment classifier on `anomaly`, then
/// Tasks 2 and 3 on `mixed`. Stages a variant does not use are skipped.
pub fn smtcnn_train_full(
    mixed: &TimeSeriesDataset,
    normal: &TimeSeriesDataset,
    anomaly: &TimeSeriesDataset,
    cfg: &CascadeConfig,
    variant: Variant,
    seed: u64,
) -> Result<CascadeModels, CascadeError> {
    require_regime(mixed.regime, Regime::Mixed)?;
    require_regime(normal.regime, Regime::NormalOnly)?;
    require_regime(anomaly.regime, Regime::AnomalyOnly)?;
    let detector = if variant.uses_changepoints() {
        let mut dc = cfg.detector.clone();
        dc.autoencoder.train.seed = stage_seed(seed, "changepoint");
        Some(ChangePointDetector::fit(normal, &dc)?.0)
    } else {
        None
    };
    let segclass = if variant.uses_segclass() {
        let rows = windowize(anomaly, cfg.prior.window, cfg.prior.stride)?;
        let mut sc = cfg.segclass.clone();
        sc.seed = stage_seed(seed, "segclass");
        Some(train_classifier(&rows, &sc)?)
    } else {
        None
    };
    let scaler = ChannelScaler::fit(&normal.features());
    let heads = train_cascade_heads(
        mixed,
        detector.as_ref(),
        segclass.as_ref(),
        &scaler,
        None,
        cfg,
        variant,
        None,
        seed,
    )?;
    Ok(CascadeModels {
        variant,
        detector,
        segclass,
        prior: cfg.prior,
        task2_scope: cfg.task2_scope,
        task2: heads.task2,
        task3: heads.task3,
    })
}

/// Argmax over twelve classes; class 12 wins any tie it is part of, otherwise the lower id.
pub(crate) fn cascade_argmax(p: &[f64]) -> usize {
    let normal = usize::from(NORMAL_CLASS) - 1;
    let mut best = normal;
    for (k, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = k;
        }
    }
    best
}

/// Runs Tasks 1 → 2 → 3 on a raw feature matrix.
pub fn smtcnn_infer(features: &Tensor2, models: &CascadeModels) -> Result<CascadePrediction, CascadeError> {
    infer_with_flags(features, models, None)
}

/// [`smtcnn_infer`] with the detector's window flags for `features` already at hand.
pub fn infer_with_flags(
    features: &Tensor2,
    models: &CascadeModels,
    flags: Option<&[bool]>,
) -> Result<CascadePrediction, CascadeError> {
    let p = propose(models.variant, models.detector.as_ref(), models.task2_scope, features, flags)?;
    let o2 = task2_score(&models.task2, features, &p.task2_segments)?;
    let bias = prior(models.variant, models.segclass.as_ref(), features, &p.segments, &o2, &models.prior)?;
    let inputs = CascadeInputs::new(features.clone(), p.mask, o2)?;
    let probs = task3_forward(&models.task3, &inputs, bias.as_ref())?;
    let t = probs.rows();
    let mut classes = Vec::with_capacity(t);
    let mut p_anomaly = Vec::with_capacity(t);
    for i in 0..t {
        let row = probs.row(i);
        classes.push((cascade_argmax(row) + 1) as u8);
        p_anomaly.push((1.0 - row[usize::from(NORMAL_CLASS) - 1]).clamp(0.0, 1.0));
    }
    Ok(CascadePrediction {
        anomaly: classes.iter().map(|&c| c != NORMAL_CLASS).collect(),
        classes,
        p_anomaly,
        probs,
        segments: p.segments,
    })
}
