use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{train_classifier, ClassifierConfig, SegClassError, WindowFeatures};
use crate::eval::{confusion, metrics, ConfusionMatrix, EvalReport, FoldResult};
use crate::sim::NORMAL_CLASS;

pub const FOLDS: usize = 10;

/// Shuffled stratified assignment of rows to `folds` folds.
///
/// Each class is shuffled and dealt round-robin, continuing the deal across classes, so fold
/// sizes differ by at most one and a class with at least `folds` rows reaches every fold.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, SegClassError> {
    if folds == 0 || labels.len() < folds {
        return Err(SegClassError::TooFewRows {
            rows: labels.len(),
            folds,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for c in classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            out[next % folds].push(i);
            next += 1;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CrossValReport {
    pub report: EvalReport,
    /// Sum of the per-fold confusion matrices.
    pub pooled: ConfusionMatrix,
    pub folds: Vec<ConfusionMatrix>,
}

/// Ten-fold stratified cross-validation of one classifier configuration.
pub fn crossval_10fold(rows: &[WindowFeatures], cfg: &ClassifierConfig, seed: u64) -> Result<CrossValReport, SegClassError> {
    let labels: Vec<u8> = rows.iter().map(|r| r.label).collect();
    let folds = stratified_folds(&labels, FOLDS, seed)?;
    let mut pooled = ConfusionMatrix::new(NORMAL_CLASS as usize);
    let mut results = Vec::with_capacity(FOLDS);
    let mut mats = Vec::with_capacity(FOLDS);
    for (k, test) in folds.iter().enumerate() {
        let mut is_test = vec![false; rows.len()];
        test.iter().for_each(|&i| is_test[i] = true);
        let train: Vec<WindowFeatures> = rows
            .iter()
            .zip(&is_test)
            .filter(|(_, &t)| !t)
            .map(|(r, _)| r.clone())
            .collect();
        let model = train_classifier(&train, cfg)?;
        let mut preds = Vec::with_capacity(test.len());
        for &i in test {
            preds.push(model.predict(&rows[i].features)?.0);
        }
        let truth: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
        let cm = confusion(&preds, &truth, NORMAL_CLASS as usize).map_err(|_| SegClassError::Config("label outside 1..=12"))?;
        let m = metrics(&cm).map_err(|_| SegClassError::Empty)?;
        pooled.merge(&cm);
        mats.push(cm);
        results.push(FoldResult {
            index: k,
            fold: None,
            metrics: m,
        });
    }
    let report = EvalReport::from_folds(cfg.kind.short_name(), results, Vec::new()).map_err(|_| SegClassError::Empty)?;
    Ok(CrossValReport {
        report,
        pooled,
        folds: mats,
    })
}
