use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AdamConfig, AdamState, NnError, Parameters};

/// A differentiable training problem over indexed samples.
pub trait Objective {
    type Model: Parameters + Clone;

    fn train_len(&self) -> usize;
    fn val_len(&self) -> usize;
    /// Mean loss over `batch` (indices into the training split) and its gradient.
    fn batch_loss_grad(&self, model: &Self::Model, batch: &[usize]) -> (f64, Self::Model);
    fn val_loss(&self, model: &Self::Model) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EarlyStopConfig {
    pub patience: usize,
    pub min_delta: f64,
    pub restore_best: bool,
}

impl Default for EarlyStopConfig {
    fn default() -> Self {
        Self {
            patience: 10,
            min_delta: 0.0,
            restore_best: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub early_stop: Option<EarlyStopConfig>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 200,
            batch_size: 8,
            adam: AdamConfig::default(),
            early_stop: Some(EarlyStopConfig::default()),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<M> {
    pub model: M,
    pub history: Vec<EpochStats>,
    /// Epoch whose weights were kept when early stopping restored the best model.
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

/// Minibatch Adam training with optional early stopping on the validation loss.
///
/// An epoch counts as an improvement when its validation loss is below the best so far by
/// more than `min_delta`. Training stops after `patience` consecutive epochs without one.
pub fn train<O: Objective>(
    mut model: O::Model,
    objective: &O,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<O::Model>, NnError> {
    if cfg.batch_size == 0 || cfg.max_epochs == 0 {
        return Err(NnError::Config("batch size and epoch count must be positive"));
    }
    if objective.train_len() == 0 {
        return Err(NnError::EmptyInput("training samples"));
    }
    if let Some(es) = cfg.early_stop {
        if objective.val_len() == 0 {
            return Err(NnError::Config("early stopping needs validation samples"));
        }
        if es.patience == 0 || es.min_delta < 0.0 {
            return Err(NnError::Config("patience must be ≥ 1 and min_delta ≥ 0"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::for_params(cfg.adam, &model)?;
    let mut order: Vec<usize> = (0..objective.train_len()).collect();
    let mut flat = model.flatten();
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, O::Model)> = None;
    let mut stale = 0;
    let mut stopped_early = false;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut batches = 0;
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grads) = objective.batch_loss_grad(&model, batch);
            if !loss.is_finite() {
                return Err(NnError::NonFiniteLoss { epoch, loss });
            }
            adam.step_flat(&mut flat, &grads.flatten())?;
            model.assign_flat(&flat);
            sum += loss;
            batches += 1;
        }
        let val_loss = (objective.val_len() > 0).then(|| objective.val_loss(&model));
        if let Some(v) = val_loss {
            if !v.is_finite() {
                return Err(NnError::NonFiniteLoss { epoch, loss: v });
            }
        }
        history.push(EpochStats {
            epoch,
            train_loss: sum / batches as f64,
            val_loss,
        });

        if let (Some(es), Some(v)) = (cfg.early_stop, val_loss) {
            let improved = best.as_ref().map_or(true, |(b, _, _)| v < b - es.min_delta);
            if improved {
                best = Some((v, epoch, model.clone()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= es.patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    let mut best_epoch = None;
    if let (Some(es), Some((_, epoch, weights))) = (cfg.early_stop, best) {
        best_epoch = Some(epoch);
        if es.restore_best {
            model = weights;
        }
    }
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
        stopped_early,
    })
}
