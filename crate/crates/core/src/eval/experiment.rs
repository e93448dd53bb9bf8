use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{confusion, metrics, ConfusionMatrix, EvalError, EvalReport, FoldResult, MetricSet, SeqCvPlan, SeqFold};
use crate::cascade::{
    infer_with_flags, train_cascade_heads, CascadeConfig, CascadeError, CascadeModels, Task2Model, Variant,
};
use crate::changepoint::{reconstruction_errors, detect_changepoints, ChangePointDetector, ChannelScaler};
use crate::segclass::{train_classifier, windowize, ClassifierModel};
use crate::seed::stage_seed;
use crate::sim::{TimeSeriesDataset, NORMAL_CLASS};

/// Share of planned folds that must succeed.
pub const MIN_VALID_FOLDS: f64 = 0.8;

#[derive(Clone, Copy, Debug)]
pub struct ExperimentData<'a> {
    pub mixed: &'a TimeSeriesDataset,
    pub normal: &'a TimeSeriesDataset,
    pub anomaly: &'a TimeSeriesDataset,
}

/// Stages that never see mixed data, trained once for all folds, plus the detector's
/// window flags over the whole mixed series.
#[derive(Clone, Debug)]
pub struct SharedStages {
    pub detector: ChangePointDetector,
    pub segclass: ClassifierModel,
    pub scaler: ChannelScaler,
    pub flags: Vec<bool>,
}

impl SharedStages {
    pub fn fit(data: &ExperimentData<'_>, cfg: &CascadeConfig, seed: u64) -> Result<Self, CascadeError> {
        let mut dc = cfg.detector.clone();
        dc.autoencoder.train.seed = stage_seed(seed, "changepoint");
        let (detector, _) = ChangePointDetector::fit(data.normal, &dc)?;
        let rows = windowize(data.anomaly, cfg.prior.window, cfg.prior.stride)?;
        let mut sc = cfg.segclass.clone();
        sc.seed = stage_seed(seed, "segclass");
        let segclass = train_classifier(&rows, &sc)?;
        Self::new(detector, segclass, ChannelScaler::fit(&data.normal.features()), data.mixed)
    }

    pub fn new(
        detector: ChangePointDetector,
        segclass: ClassifierModel,
        scaler: ChannelScaler,
        mixed: &TimeSeriesDataset,
    ) -> Result<Self, CascadeError> {
        let errors = reconstruction_errors(&detector.model, &mixed.features())?;
        let flags = detect_changepoints(&errors, &detector.threshold);
        Ok(Self {
            detector,
            segclass,
            scaler,
            flags,
        })
    }

    /// All models of `variant`, with Tasks 2 and 3 trained on the whole mixed series.
    /// Same result as `smtcnn_train_full` with the same seed, without refitting the
    /// shared stages.
    pub fn train_variant(
        &self,
        mixed: &TimeSeriesDataset,
        cfg: &CascadeConfig,
        variant: Variant,
        seed: u64,
    ) -> Result<CascadeModels, CascadeError> {
        let heads = train_cascade_heads(
            mixed,
            Some(&self.detector),
            Some(&self.segclass),
            &self.scaler,
            Some(&self.flags),
            cfg,
            variant,
            None,
            seed,
        )?;
        Ok(CascadeModels {
            variant,
            detector: variant.uses_changepoints().then(|| self.detector.clone()),
            segclass: variant.uses_segclass().then(|| self.segclass.clone()),
            prior: cfg.prior,
            task2_scope: cfg.task2_scope,
            task2: heads.task2,
            task3: heads.task3,
        })
    }

    /// Window flags of the block `start..end`. The detector's input scaling is fixed, so
    /// this equals running it on the block alone.
    pub fn block_flags(&self, start: usize, end: usize) -> &[bool] {
        let w = self.detector.window();
        if end < start + w {
            &[]
        } else {
            &self.flags[start..end + 1 - w]
        }
    }
}

/// Result of one fold of one variant.
#[derive(Clone, Debug)]
pub struct FoldOutcome {
    pub metrics: MetricSet,
    pub confusion: ConfusionMatrix,
    pub task2: Task2Model,
}

/// Trains `variant` on the fold's training block and scores every step of its test block.
pub fn run_fold(
    data: &ExperimentData<'_>,
    shared: &SharedStages,
    cfg: &CascadeConfig,
    variant: Variant,
    fold: &SeqFold,
    seed: u64,
    reuse_task2: Option<&Task2Model>,
) -> Result<FoldOutcome, CascadeError> {
    let tr = fold.train();
    let te = fold.test();
    let train = data.mixed.slice(tr.start, tr.end);
    let heads = train_cascade_heads(
        &train,
        Some(&shared.detector),
        Some(&shared.segclass),
        &shared.scaler,
        Some(shared.block_flags(tr.start, tr.end)),
        cfg,
        variant,
        reuse_task2,
        seed,
    )?;
    let models = CascadeModels {
        variant,
        detector: variant.uses_changepoints().then(|| shared.detector.clone()),
        segclass: variant.uses_segclass().then(|| shared.segclass.clone()),
        prior: cfg.prior,
        task2_scope: cfg.task2_scope,
        task2: heads.task2,
        task3: heads.task3,
    };
    let test = data.mixed.slice(te.start, te.end);
    let pred = infer_with_flags(&test.features(), &models, Some(shared.block_flags(te.start, te.end)))?;
    let cm = confusion(&pred.classes, &test.class_labels(), usize::from(NORMAL_CLASS))
        .map_err(|e| CascadeError::Other(e.to_string()))?;
    let m = metrics(&cm).map_err(|e| CascadeError::Other(e.to_string()))?;
    Ok(FoldOutcome {
        metrics: m,
        confusion: cm,
        task2: models.task2,
    })
}

/// Runs every variant on every fold of `plan`; one report per variant, in `variants` order.
///
/// A failing fold is logged and skipped. A variant fails when fewer than 80% of the planned
/// folds succeed.
pub fn run_experiment(
    data: &ExperimentData<'_>,
    shared: &SharedStages,
    cfg: &CascadeConfig,
    variants: &[Variant],
    plan: &SeqCvPlan,
    seed: u64,
) -> Result<Vec<EvalReport>, EvalError> {
    let mut results: Vec<Vec<FoldResult>> = vec![Vec::new(); variants.len()];
    let mut skipped: Vec<Vec<usize>> = vec![Vec::new(); variants.len()];
    for (k, fold) in plan.folds.iter().enumerate() {
        let fold_seed = stage_seed(seed, &format!("fold{k}"));
        // Task 2 depends only on the proposals, so variants with the same masking share it
        let mut task2_cache: [Option<Task2Model>; 2] = [None, None];
        for (v, &variant) in variants.iter().enumerate() {
            let slot = usize::from(variant.uses_changepoints());
            match run_fold(data, shared, cfg, variant, fold, fold_seed, task2_cache[slot].as_ref()) {
                Ok(out) => {
                    log::info!(
                        "fold {k} {}: balanced accuracy {:.4}, specificity {:.4}",
                        variant.short_name(),
                        out.metrics.balanced_accuracy,
                        out.metrics.specificity
                    );
                    results[v].push(FoldResult {
                        index: k,
                        fold: Some(*fold),
                        metrics: out.metrics,
                    });
                    task2_cache[slot] = Some(out.task2);
                }
                Err(e) => {
                    log::warn!("fold {k} {} skipped: {e}", variant.short_name());
                    skipped[v].push(k);
                }
            }
        }
    }
    let required = libm::ceil(MIN_VALID_FOLDS * plan.folds.len() as f64) as usize;
    variants
        .iter()
        .zip(results.into_iter().zip(skipped))
        .map(|(variant, (folds, skipped))| {
            if folds.len() < required.max(1) {
                return Err(EvalError::TooFewFolds {
                    valid: folds.len(),
                    required,
                });
            }
            EvalReport::from_folds(variant.label(), folds, skipped)
        })
        .collect()
}
