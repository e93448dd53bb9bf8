use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{require_regime, CascadeError, CascadeInputs, PriorConfig, StageConfig};
use crate::changepoint::{segments_to_mask, ChangePointDetector, ChannelScaler, Segment};
use crate::nn::{train, EpochStats, SequenceClassifier, SequenceObjective, SequenceSample};
use crate::segclass::{window_features, ClassifierModel};
use crate::sim::{Regime, TimeSeriesDataset, FAULT_CLASSES, NORMAL_CLASS};
use crate::tensor::Tensor2;

/// Task 2 labels (one-based head outputs).
pub const ANOMALY_LABEL: usize = 1;
pub const NORMAL_LABEL: usize = 2;

/// Two-way anomaly head over standardised features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task2Model {
    pub net: SequenceClassifier,
    pub scaler: ChannelScaler,
    pub chunk_len: usize,
    pub history: Vec<EpochStats>,
}

/// Twelve-way head over `X ⊕ O_t1 ⊕ O_t2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task3Model {
    pub net: SequenceClassifier,
    pub scaler: ChannelScaler,
    pub chunk_len: usize,
    pub history: Vec<EpochStats>,
}

/// Task 1: segments and mask from a raw feature matrix.
pub fn task1_propose(features: &Tensor2, det: &ChangePointDetector) -> Result<(Vec<Segment>, Vec<f64>), CascadeError> {
    let segments = det.segments(features)?;
    let mask = segments_to_mask(&segments, features.rows());
    Ok((segments, mask))
}

/// Task 1 from window flags that were already computed for this series.
pub fn task1_from_flags(det: &ChangePointDetector, flags: &[bool], len: usize) -> (Vec<Segment>, Vec<f64>) {
    let segments = det.segments_from_flags(flags);
    let mask = segments_to_mask(&segments, len);
    (segments, mask)
}

/// Consecutive pieces of `start..end`, each at most `len` long.
pub fn chunk_ranges(start: usize, end: usize, len: usize) -> Vec<Range<usize>> {
    let len = len.max(1);
    (start..end).step_by(len).map(|s| s..(s + len).min(end)).collect()
}

/// Caps the chunk list and splits off a validation share, both at random.
fn split_chunks(
    mut chunks: Vec<Range<usize>>,
    cfg: &StageConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<Range<usize>>, Vec<Range<usize>>) {
    chunks.shuffle(rng);
    chunks.truncate(cfg.max_chunks.max(1));
    let n_val = if chunks.len() >= 4 {
        libm::round(chunks.len() as f64 * cfg.val_fraction) as usize
    } else {
        0
    };
    let val = chunks.split_off(chunks.len() - n_val);
    (chunks, val)
}

fn fit_stage(
    input_dim: usize,
    classes: usize,
    train_samples: Vec<SequenceSample>,
    val_samples: Vec<SequenceSample>,
    cfg: &StageConfig,
    seed: u64,
) -> Result<(SequenceClassifier, Vec<EpochStats>), CascadeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = SequenceClassifier::new(input_dim, &cfg.hidden, classes, &mut rng);
    let mut tc = cfg.train;
    tc.seed = seed;
    if val_samples.is_empty() {
        tc.early_stop = None;
    }
    let objective = SequenceObjective {
        train: train_samples,
        val: val_samples,
    };
    let out = train(net, &objective, &tc)?;
    Ok((out.model, out.history))
}

/// Permutes and sign-flips the first `channels` columns of a standardised
/// chunk. Normal steps stay near the origin; fault deviations move to other
/// channels. Remaining columns are copied as is.
fn symmetric_input(x: &Tensor2, channels: usize, rng: &mut ChaCha8Rng) -> Tensor2 {
    let mut perm: Vec<usize> = (0..channels).collect();
    perm.shuffle(rng);
    let signs: Vec<f64> = (0..channels).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let mut out = x.clone();
    for t in 0..x.rows() {
        for c in 0..channels {
            out.set(t, c, signs[c] * x.get(t, perm[c]));
        }
    }
    out
}

fn symmetric_copy(sample: &SequenceSample, rng: &mut ChaCha8Rng) -> SequenceSample {
    SequenceSample {
        input: symmetric_input(&sample.input, sample.input.cols(), rng),
        labels: sample.labels.clone(),
        logit_bias: None,
    }
}

/// Applies one random permutation of the fault classes to both the labels
/// and the prior offsets, and scrambles the feature channels. Normal keeps
/// its id.
fn relabelled_copy(sample: &SequenceSample, channels: usize, rng: &mut ChaCha8Rng) -> SequenceSample {
    let faults = usize::from(FAULT_CLASSES);
    let mut perm: Vec<usize> = (0..faults).collect();
    perm.shuffle(rng);
    let labels = sample
        .labels
        .iter()
        .map(|&l| if l <= faults { perm[l - 1] + 1 } else { l })
        .collect();
    let logit_bias = sample.logit_bias.as_ref().map(|b| {
        let mut out = b.clone();
        for t in 0..b.rows() {
            for (c, &pc) in perm.iter().enumerate() {
                out.set(t, pc, b.get(t, c));
            }
        }
        out
    });
    SequenceSample {
        input: symmetric_input(&sample.input, channels, rng),
        labels,
        logit_bias,
    }
}

/// Task 2: fits the anomaly head on chunks of the proposed segments.
pub fn train_task2(
    mixed: &TimeSeriesDataset,
    segments: &[Segment],
    scaler: &ChannelScaler,
    cfg: &StageConfig,
    seed: u64,
) -> Result<Task2Model, CascadeError> {
    require_regime(mixed.regime, Regime::Mixed)?;
    if segments.is_empty() {
        return Err(CascadeError::NoSegments);
    }
    let z = scaler.transform(&mixed.features());
    let chunks: Vec<Range<usize>> = segments
        .iter()
        .flat_map(|s| chunk_ranges(s.start, s.end.min(mixed.len()), cfg.chunk_len))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a52_0000);
    let (tr, va) = split_chunks(chunks, cfg, &mut rng);
    let sample = |r: &Range<usize>| SequenceSample {
        input: z.slice_rows(r.start, r.end),
        labels: mixed.records[r.clone()]
            .iter()
            .map(|rec| if rec.anomaly { ANOMALY_LABEL } else { NORMAL_LABEL })
            .collect(),
        logit_bias: None,
    };
    let mut train_samples: Vec<SequenceSample> = tr.iter().map(sample).collect();
    let originals = train_samples.len();
    for k in 0..originals {
        for _ in 0..cfg.augment {
            let aug = symmetric_copy(&train_samples[k], &mut rng);
            train_samples.push(aug);
        }
    }
    let (net, history) = fit_stage(
        z.cols(),
        2,
        train_samples,
        va.iter().map(sample).collect(),
        cfg,
        seed,
    )?;
    Ok(Task2Model {
        net,
        scaler: scaler.clone(),
        chunk_len: cfg.chunk_len,
        history,
    })
}

/// `O_t2`: anomaly probability inside `segments`, zero elsewhere.
pub fn task2_score(model: &Task2Model, features: &Tensor2, segments: &[Segment]) -> Result<Vec<f64>, CascadeError> {
    let z = model.scaler.transform(features);
    let mut out = vec![0.0; features.rows()];
    for s in segments {
        for r in chunk_ranges(s.start, s.end.min(features.rows()), model.chunk_len) {
            let p = model.net.forward(&z.slice_rows(r.start, r.end), None)?;
            for (i, t) in r.enumerate() {
                out[t] = p.get(i, ANOMALY_LABEL - 1);
            }
        }
    }
    Ok(out)
}

/// Per-step Task 3 input: standardised features, then `O_t1`, then `O_t2`.
pub fn task3_input(z: &Tensor2, mask: &[f64], o2: &[f64]) -> Tensor2 {
    let d = z.cols() + 2;
    let mut out = Tensor2::zeros(z.rows(), d);
    for t in 0..z.rows() {
        let row = out.row_mut(t);
        row[..d - 2].copy_from_slice(z.row(t));
        row[d - 2] = mask[t];
        row[d - 1] = o2[t];
    }
    out
}

/// Regions the segment classifier labels: runs of `o2 > threshold` inside each segment
/// (gaps shorter than `merge_gap` closed), or the segments themselves without `o2`.
pub fn prior_regions(segments: &[Segment], o2: Option<&[f64]>, cfg: &PriorConfig) -> Vec<Segment> {
    let Some(o2) = o2 else {
        return segments.to_vec();
    };
    let mut out: Vec<Segment> = Vec::new();
    for s in segments {
        let mut run_start = None;
        for t in s.start..=s.end.min(o2.len()) {
            let hot = t < s.end.min(o2.len()) && o2[t] > cfg.threshold;
            match (hot, run_start) {
                (true, None) => run_start = Some(t),
                (false, Some(a)) => {
                    match out.last_mut() {
                        Some(prev) if prev.end + cfg.merge_gap > a && prev.end >= s.start => prev.end = t,
                        _ => out.push(Segment::new(a, t)),
                    }
                    run_start = None;
                }
                _ => {}
            }
        }
    }
    out
}

/// Task 3 logit offsets from the segment classifier; see [`PriorConfig`].
pub fn segclass_prior(
    model: &ClassifierModel,
    x: &Tensor2,
    segments: &[Segment],
    o2: Option<&[f64]>,
    cfg: &PriorConfig,
) -> Result<Tensor2, CascadeError> {
    let k = usize::from(FAULT_CLASSES);
    let mut bias = Tensor2::zeros(x.rows(), usize::from(NORMAL_CLASS));
    for s in prior_regions(segments, o2, cfg) {
        let end = s.end.min(x.rows());
        if end <= s.start {
            continue;
        }
        let n = end - s.start;
        let w = cfg.window.clamp(1, n);
        let mut starts: Vec<usize> = (0..=n - w).step_by(cfg.stride.max(1)).collect();
        if *starts.last().expect("at least one window") != n - w {
            starts.push(n - w);
        }
        let mut dist = vec![0.0; k];
        for &o in &starts {
            let p = model.proba(&window_features(x, s.start + o, w))?;
            for (c, v) in model.classes.iter().zip(p) {
                if (1..=FAULT_CLASSES).contains(c) {
                    dist[usize::from(*c) - 1] += v / starts.len() as f64;
                }
            }
        }
        let offsets: Vec<f64> = dist
            .iter()
            .map(|p| cfg.strength * libm::log(k as f64 * p.max(cfg.floor)))
            .collect();
        for t in s.start..end {
            bias.row_mut(t)[..k].copy_from_slice(&offsets);
        }
    }
    Ok(bias)
}

fn check_bias(bias: Option<&Tensor2>, t: usize) -> Result<(), CascadeError> {
    if let Some(b) = bias {
        if b.rows() != t {
            return Err(CascadeError::Misaligned {
                what: "logit offsets",
                expected: t,
                found: b.rows(),
            });
        }
    }
    Ok(())
}

/// Task 3: fits the twelve-way head on chunks that touch the mask plus a random share of
/// mask-free background chunks.
pub fn train_task3(
    mixed: &TimeSeriesDataset,
    inputs: &CascadeInputs,
    bias: Option<&Tensor2>,
    scaler: &ChannelScaler,
    cfg: &StageConfig,
    background_ratio: f64,
    seed: u64,
) -> Result<Task3Model, CascadeError> {
    require_regime(mixed.regime, Regime::Mixed)?;
    if inputs.len() != mixed.len() {
        return Err(CascadeError::Misaligned {
            what: "Task 3 inputs",
            expected: mixed.len(),
            found: inputs.len(),
        });
    }
    check_bias(bias, mixed.len())?;
    let z = scaler.transform(&inputs.x);
    let input = task3_input(&z, &inputs.mask, &inputs.o2);
    let (mut fg, mut bg): (Vec<Range<usize>>, Vec<Range<usize>>) = chunk_ranges(0, mixed.len(), cfg.chunk_len)
        .into_iter()
        .partition(|r| inputs.mask[r.clone()].iter().any(|&m| m > 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a53_0000);
    fg.shuffle(&mut rng);
    fg.truncate(cfg.max_chunks.max(1));
    bg.shuffle(&mut rng);
    let cap = cfg.max_chunks.max(1);
    // with nothing proposed, the background is all there is to learn from
    let n_bg = if fg.is_empty() {
        cap
    } else {
        (libm::ceil(background_ratio * fg.len() as f64) as usize).min(cap - fg.len())
    };
    bg.truncate(n_bg);
    fg.extend(bg);
    let (tr, va) = split_chunks(fg, cfg, &mut rng);
    let sample = |r: &Range<usize>| SequenceSample {
        input: input.slice_rows(r.start, r.end),
        labels: mixed.records[r.clone()].iter().map(|rec| usize::from(rec.fault_class)).collect(),
        logit_bias: bias.map(|b| b.slice_rows(r.start, r.end)),
    };
    let mut train_samples: Vec<SequenceSample> = tr.iter().map(sample).collect();
    if bias.is_some() {
        let originals = train_samples.len();
        for k in 0..originals {
            if train_samples[k].labels.iter().all(|&l| l == usize::from(NORMAL_CLASS)) {
                continue;
            }
            for _ in 0..cfg.augment {
                let aug = relabelled_copy(&train_samples[k], z.cols(), &mut rng);
                train_samples.push(aug);
            }
        }
    }
    let (net, history) = fit_stage(
        input.cols(),
        usize::from(NORMAL_CLASS),
        train_samples,
        va.iter().map(sample).collect(),
        cfg,
        seed,
    )?;
    Ok(Task3Model {
        net,
        scaler: scaler.clone(),
        chunk_len: cfg.chunk_len,
        history,
    })
}

/// Task 3 class distributions (`T×12`) over the chunk grid.
pub fn task3_forward(model: &Task3Model, inputs: &CascadeInputs, bias: Option<&Tensor2>) -> Result<Tensor2, CascadeError> {
    check_bias(bias, inputs.len())?;
    let z = model.scaler.transform(&inputs.x);
    let input = task3_input(&z, &inputs.mask, &inputs.o2);
    let c = model.net.classes();
    let mut out = Tensor2::zeros(inputs.len(), c);
    for r in chunk_ranges(0, inputs.len(), model.chunk_len) {
        let b = bias.map(|b| b.slice_rows(r.start, r.end));
        let p = model.net.forward(&input.slice_rows(r.start, r.end), b.as_ref())?;
        for (i, t) in r.enumerate() {
            out.row_mut(t).copy_from_slice(p.row(i));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::changepoint::{AutoencoderModel, SegmentationParams, ThresholdSpec};
    use crate::nn::{sequence_cross_entropy, AdamConfig, Parameters, TrainConfig};
    use crate::sim::{generate_dataset, SimConfig};

    fn small_stage(epochs: usize) -> StageConfig {
        StageConfig {
            hidden: vec![6, 6],
            chunk_len: 16,
            max_chunks: 12,
            val_fraction: 0.0,
            augment: 0,
            train: TrainConfig {
                max_epochs: epochs,
                batch_size: 4,
                adam: AdamConfig::with_alpha(1e-2),
                early_stop: None,
                seed: 0,
            },
        }
    }

    fn detector() -> ChangePointDetector {
        ChangePointDetector {
            model: AutoencoderModel::zeros(ChannelScaler::identity(3), 4, 2, 2),
            threshold: ThresholdSpec {
                mean: 0.0,
                std: 0.0,
                k: 3.0,
                tau: 0.0,
            },
            segmentation: SegmentationParams { min_gap: 1, min_len: 1 },
        }
    }

    fn mixed(len: usize, rate: f64, seed: u64) -> TimeSeriesDataset {
        let cfg = SimConfig {
            length: len,
            fault_rate: rate,
            seed,
            ..SimConfig::default()
        };
        generate_dataset(Regime::Mixed, &cfg).unwrap()
    }

    #[test]
    fn chunks_tile_the_interval() {
        let r = chunk_ranges(5, 42, 16);
        assert_eq!(r, vec![5..21, 21..37, 37..42]);
        assert!(chunk_ranges(3, 3, 8).is_empty());
    }

    #[test]
    fn no_flags_give_an_empty_proposal() {
        let (segs, mask) = task1_from_flags(&detector(), &[false; 37], 40);
        assert!(segs.is_empty());
        assert_eq!(mask, vec![0.0; 40]);
    }

    #[test]
    fn mask_matches_segments() {
        let mut flags = vec![false; 60];
        flags[10..14].iter_mut().for_each(|f| *f = true);
        flags[40] = true;
        let (segs, mask) = task1_from_flags(&detector(), &flags, 63);
        assert!(!segs.is_empty());
        let covered: usize = segs.iter().map(|s| s.len()).sum();
        assert_eq!(mask.iter().sum::<f64>() as usize, covered);
        for (t, &m) in mask.iter().enumerate() {
            assert_eq!(m == 1.0, segs.iter().any(|s| s.contains(t)));
        }
    }

    #[test]
    fn task2_needs_segments() {
        let ds = mixed(200, 0.05, 1);
        let scaler = ChannelScaler::fit(&ds.features());
        assert_eq!(
            train_task2(&ds, &[], &scaler, &small_stage(1), 0).unwrap_err(),
            CascadeError::NoSegments
        );
    }

    #[test]
    fn task2_scores_are_probabilities_and_zero_outside() {
        let ds = mixed(300, 0.05, 2);
        let scaler = ChannelScaler::fit(&ds.features());
        let segs = vec![Segment::new(20, 90), Segment::new(150, 260)];
        let model = train_task2(&ds, &segs, &scaler, &small_stage(2), 3).unwrap();
        let x = ds.features();
        let o2 = task2_score(&model, &x, &segs).unwrap();
        for (t, &p) in o2.iter().enumerate() {
            assert!((0.0..=1.0).contains(&p));
            if !segs.iter().any(|s| s.contains(t)) {
                assert_eq!(p, 0.0);
            }
        }
        assert_eq!(task2_score(&model, &x, &[]).unwrap(), vec![0.0; 300]);
    }

    #[test]
    fn equal_task2_logits_give_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = SequenceClassifier::new(3, &[4, 4], 2, &mut rng);
        let model = Task2Model {
            net: net.zeros_like(),
            scaler: ChannelScaler::identity(3),
            chunk_len: 8,
            history: Vec::new(),
        };
        let x = mixed(30, 0.0, 1).features();
        let o2 = task2_score(&model, &x, &[Segment::new(0, 30)]).unwrap();
        assert!(o2.iter().all(|&p| p == 0.5));
    }

    #[test]
    fn task2_is_deterministic() {
        let ds = mixed(300, 0.05, 4);
        let scaler = ChannelScaler::fit(&ds.features());
        let segs = vec![Segment::new(0, 300)];
        let mut cfg = small_stage(2);
        cfg.augment = 1;
        let a = train_task2(&ds, &segs, &scaler, &cfg, 9).unwrap();
        let b = train_task2(&ds, &segs, &scaler, &cfg, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn task3_rejects_misaligned_inputs() {
        let ds = mixed(100, 0.0, 1);
        let inputs = CascadeInputs::bare(ds.slice(0, 90).features());
        let scaler = ChannelScaler::identity(3);
        let err = train_task3(&ds, &inputs, None, &scaler, &small_stage(1), 1.0, 0).unwrap_err();
        assert!(matches!(err, CascadeError::Misaligned { .. }));
    }

    #[test]
    fn first_epoch_loss_is_the_cross_entropy_of_the_initial_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<SequenceSample> = (0..6)
            .map(|_| {
                let t = 8;
                let input = Tensor2::from_vec(t, 5, (0..t * 5).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
                let labels = (0..t).map(|_| rng.gen_range(1..=12)).collect();
                let bias = Tensor2::from_vec(t, 12, (0..t * 12).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
                SequenceSample {
                    input,
                    labels,
                    logit_bias: Some(bias),
                }
            })
            .collect();
        let mut cfg = small_stage(1);
        cfg.train.batch_size = samples.len();
        let seed = 77;
        let (_, history) = fit_stage(5, 12, samples.clone(), Vec::new(), &cfg, seed).unwrap();

        let initial = SequenceClassifier::new(5, &cfg.hidden, 12, &mut ChaCha8Rng::seed_from_u64(seed));
        let probs: Vec<Tensor2> = samples
            .iter()
            .map(|s| initial.forward(&s.input, s.logit_bias.as_ref()).unwrap())
            .collect();
        let labels: Vec<Vec<usize>> = samples.iter().map(|s| s.labels.clone()).collect();
        let oracle = sequence_cross_entropy(&probs, &labels).unwrap();
        assert!((history[0].train_loss - oracle).abs() < 1e-12);
    }

    #[test]
    fn all_normal_series_learns_class_12() {
        let ds = mixed(256, 0.0, 6);
        let scaler = ChannelScaler::fit(&ds.features());
        let inputs = CascadeInputs::bare(ds.features());
        let mut cfg = small_stage(150);
        cfg.max_chunks = 16;
        let model = train_task3(&ds, &inputs, None, &scaler, &cfg, 1.0, 1).unwrap();
        let final_loss = model.history.last().unwrap().train_loss;
        assert!(final_loss < 0.05, "loss {final_loss}");
        let probs = task3_forward(&model, &inputs, None).unwrap();
        for t in 0..probs.rows() {
            let row = probs.row(t);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(super::super::pipeline::cascade_argmax(row), 11);
        }
    }

    #[test]
    fn relabelled_copy_moves_labels_with_their_offsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = 5;
        let bias = Tensor2::from_vec(t, 12, (0..t * 12).map(|v| v as f64).collect()).unwrap();
        let sample = SequenceSample {
            input: Tensor2::from_vec(t, 5, (0..t * 5).map(|v| v as f64 * 0.1).collect()).unwrap(),
            labels: vec![3, 12, 7, 11, 1],
            logit_bias: Some(bias.clone()),
        };
        let copy = relabelled_copy(&sample, 3, &mut rng);
        let b = copy.logit_bias.as_ref().unwrap();
        for (step, (&old, &new)) in sample.labels.iter().zip(&copy.labels).enumerate() {
            if old == 12 {
                assert_eq!(new, 12);
            }
            assert_eq!(b.get(step, new - 1), bias.get(step, old - 1));
            assert_eq!(b.get(step, 11), bias.get(step, 11));
        }
        for step in 0..t {
            // mask and O_t2 columns are untouched, channels keep their magnitudes
            assert_eq!(&copy.input.row(step)[3..], &sample.input.row(step)[3..]);
            let mut a: Vec<f64> = sample.input.row(step)[..3].iter().map(|v| v.abs()).collect();
            let mut c: Vec<f64> = copy.input.row(step)[..3].iter().map(|v| v.abs()).collect();
            a.sort_by(f64::total_cmp);
            c.sort_by(f64::total_cmp);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn prior_regions_follow_o2_inside_segments() {
        let cfg = PriorConfig {
            merge_gap: 3,
            ..PriorConfig::default()
        };
        let mut o2 = vec![0.0; 50];
        o2[10..15].iter_mut().for_each(|p| *p = 0.9);
        o2[17..20].iter_mut().for_each(|p| *p = 0.8);
        o2[30..35].iter_mut().for_each(|p| *p = 0.9);
        o2[45] = 0.9;
        let segs = [Segment::new(5, 40)];
        assert_eq!(
            prior_regions(&segs, Some(&o2), &cfg),
            vec![Segment::new(10, 20), Segment::new(30, 35)]
        );
        assert_eq!(prior_regions(&segs, None, &cfg), segs.to_vec());
    }

    #[test]
    fn task3_input_layout() {
        let z = Tensor2::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let x = task3_input(&z, &[0.0, 1.0], &[0.25, 0.75]);
        assert_eq!(x.row(0), &[1.0, 2.0, 3.0, 0.0, 0.25]);
        assert_eq!(x.row(1), &[4.0, 5.0, 6.0, 1.0, 0.75]);
    }
}
