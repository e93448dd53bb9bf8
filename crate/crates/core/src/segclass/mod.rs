//! Supervised classification of fault windows with classical models.
//!
//! Windows are summarised by per-channel statistics ([`windowize`]) and fitted with one of
//! six model families. Scores are always "higher is better" and ties resolve to the lowest
//! class id.

mod bayes;
mod cv;
mod features;
mod linear;
mod tree;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use bayes::GaussianNb;
pub use cv::{crossval_10fold, stratified_folds, CrossValReport, FOLDS};
pub use features::{majority_label, window_features, windowize, WindowFeatures, STATS};
pub use linear::{GdParams, LinearModel, SgdLoss, SgdParams};
pub use tree::{DecisionTree, ForestParams, RandomForest, TreeNode, TreeParams};

use crate::nn::softmax;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SegClassError {
    #[error("window of {window} exceeds series length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("training rows hold a single class; nothing to separate")]
    SingleClass,
    #[error("no training rows")]
    Empty,
    #[error("{rows} rows cannot be split into {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("row has {found} features, model expects {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree,
    RandomForest,
    NaiveBayes,
    LogisticRegression,
    SgdLinear,
    LinearSvm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::NaiveBayes,
        ClassifierKind::LogisticRegression,
        ClassifierKind::SgdLinear,
        ClassifierKind::LinearSvm,
    ];

    /// Short name: dt, rf, nb, lr, sgd, svm.
    pub fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "dt",
            ClassifierKind::RandomForest => "rf",
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::LogisticRegression => "lr",
            ClassifierKind::SgdLinear => "sgd",
            ClassifierKind::LinearSvm => "svm",
        }
    }

    pub fn from_short_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.short_name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub seed: u64,
    pub tree: TreeParams,
    pub forest: ForestParams,
    /// Fraction of the largest feature variance added to every NB variance.
    pub nb_var_smoothing: f64,
    pub logistic: GdParams,
    pub sgd: SgdParams,
    pub svm: GdParams,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::RandomForest,
            seed: 0,
            tree: TreeParams::default(),
            forest: ForestParams::default(),
            nb_var_smoothing: 1e-9,
            logistic: GdParams::default(),
            sgd: SgdParams::default(),
            svm: GdParams::default(),
        }
    }
}

impl ClassifierConfig {
    pub fn for_kind(kind: ClassifierKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    NaiveBayes(GaussianNb),
    LogisticRegression(LinearModel),
    SgdLinear(LinearModel),
    LinearSvm(LinearModel),
}

/// A fitted classifier. Only [`train_classifier`] produces one, so every instance is trained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    /// Class ids in ascending order; score `k` belongs to `classes[k]`.
    pub classes: Vec<u8>,
    pub features: usize,
    pub params: ModelParams,
}

pub fn train_classifier(rows: &[WindowFeatures], cfg: &ClassifierConfig) -> Result<ClassifierModel, SegClassError> {
    let first = rows.first().ok_or(SegClassError::Empty)?;
    let d = first.features.len();
    if let Some(bad) = rows.iter().find(|r| r.features.len() != d) {
        return Err(SegClassError::Dimension {
            expected: d,
            found: bad.features.len(),
        });
    }
    let mut classes: Vec<u8> = rows.iter().map(|r| r.label).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(SegClassError::SingleClass);
    }
    let xs: Vec<Vec<f64>> = rows.iter().map(|r| r.features.clone()).collect();
    let ys: Vec<usize> = rows
        .iter()
        .map(|r| classes.binary_search(&r.label).expect("label collected above"))
        .collect();
    let k = classes.len();
    let params = match cfg.kind {
        ClassifierKind::DecisionTree => {
            ModelParams::DecisionTree(tree::fit_tree(&xs, &ys, k, (0..xs.len()).collect(), cfg.tree, d, cfg.seed))
        }
        ClassifierKind::RandomForest => {
            ModelParams::RandomForest(tree::fit_forest(&xs, &ys, k, cfg.tree, cfg.forest, cfg.seed))
        }
        ClassifierKind::NaiveBayes => ModelParams::NaiveBayes(bayes::fit_nb(&xs, &ys, k, cfg.nb_var_smoothing)),
        ClassifierKind::LogisticRegression => {
            ModelParams::LogisticRegression(linear::fit_logistic(&xs, &ys, k, cfg.logistic))
        }
        ClassifierKind::SgdLinear => ModelParams::SgdLinear(linear::fit_sgd(&xs, &ys, k, cfg.sgd, cfg.seed)),
        ClassifierKind::LinearSvm => ModelParams::LinearSvm(linear::fit_svm(&xs, &ys, k, cfg.svm)),
    };
    Ok(ClassifierModel {
        classes,
        features: d,
        params,
    })
}

/// Index of the largest score; the first one wins ties.
pub fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ModelParams::DecisionTree(_) => ClassifierKind::DecisionTree,
            ModelParams::RandomForest(_) => ClassifierKind::RandomForest,
            ModelParams::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            ModelParams::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            ModelParams::SgdLinear(_) => ClassifierKind::SgdLinear,
            ModelParams::LinearSvm(_) => ClassifierKind::LinearSvm,
        }
    }

    /// Kind-specific scores aligned with [`Self::classes`]: leaf proportions for trees,
    /// joint log-likelihoods for NB, linear scores otherwise.
    pub fn scores(&self, row: &[f64]) -> Result<Vec<f64>, SegClassError> {
        if row.len() != self.features {
            return Err(SegClassError::Dimension {
                expected: self.features,
                found: row.len(),
            });
        }
        Ok(match &self.params {
            ModelParams::DecisionTree(t) => t.proba(row),
            ModelParams::RandomForest(f) => f.proba(row),
            ModelParams::NaiveBayes(nb) => nb.scores(row),
            ModelParams::LogisticRegression(m) | ModelParams::SgdLinear(m) | ModelParams::LinearSvm(m) => m.scores(row),
        })
    }

    /// Predicted class id and the scores it came from.
    pub fn predict(&self, row: &[f64]) -> Result<(u8, Vec<f64>), SegClassError> {
        let s = self.scores(row)?;
        Ok((self.classes[argmax_first(&s)], s))
    }

    /// Scores mapped to a distribution over [`Self::classes`]. Tree scores already are one;
    /// the others go through a softmax.
    pub fn proba(&self, row: &[f64]) -> Result<Vec<f64>, SegClassError> {
        let s = self.scores(row)?;
        Ok(match self.params {
            ModelParams::DecisionTree(_) | ModelParams::RandomForest(_) => s,
            _ => softmax(&s),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn separable() -> Vec<WindowFeatures> {
        (0..40)
            .map(|i| {
                let c = (i % 2) as f64;
                let jitter = (i / 2) as f64 * 0.01;
                WindowFeatures {
                    features: vec![4.0 * c - 2.0 + jitter, 1.0 - jitter, 2.0 * c],
                    label: if i % 2 == 0 { 3 } else { 8 },
                }
            })
            .collect()
    }

    #[test]
    fn every_kind_fits_separable_data() {
        let rows = separable();
        for kind in ClassifierKind::ALL {
            let m = train_classifier(&rows, &ClassifierConfig::for_kind(kind)).unwrap();
            assert_eq!(m.classes, vec![3, 8]);
            for r in &rows {
                assert_eq!(m.predict(&r.features).unwrap().0, r.label, "{kind:?}");
            }
        }
    }

    #[test]
    fn single_class_and_empty() {
        let mut rows = separable();
        rows.iter_mut().for_each(|r| r.label = 4);
        assert_eq!(
            train_classifier(&rows, &ClassifierConfig::default()),
            Err(SegClassError::SingleClass)
        );
        assert_eq!(train_classifier(&[], &ClassifierConfig::default()), Err(SegClassError::Empty));
    }

    #[test]
    fn zero_linear_model_picks_lowest_class() {
        let rows = separable();
        let mut m = train_classifier(&rows, &ClassifierConfig::for_kind(ClassifierKind::LogisticRegression)).unwrap();
        if let ModelParams::LogisticRegression(lm) = &mut m.params {
            lm.weights.data_mut().iter_mut().for_each(|w| *w = 0.0);
            lm.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        assert_eq!(m.predict(&[5.0, 5.0, 5.0]).unwrap().0, 3);
    }

    #[test]
    fn single_unsubsampled_tree_forest_is_the_tree() {
        let rows = separable();
        let mut cfg = ClassifierConfig::for_kind(ClassifierKind::DecisionTree);
        let dt = train_classifier(&rows, &cfg).unwrap();
        cfg.kind = ClassifierKind::RandomForest;
        cfg.forest = ForestParams {
            n_trees: 1,
            max_features: Some(3),
            bootstrap: false,
        };
        let rf = train_classifier(&rows, &cfg).unwrap();
        match (&dt.params, &rf.params) {
            (ModelParams::DecisionTree(t), ModelParams::RandomForest(f)) => assert_eq!(&f.trees[0], t),
            _ => unreachable!(),
        }
    }

    #[test]
    fn dimension_check() {
        let m = train_classifier(&separable(), &ClassifierConfig::default()).unwrap();
        assert_eq!(
            m.predict(&[1.0]),
            Err(SegClassError::Dimension { expected: 3, found: 1 })
        );
    }
}
