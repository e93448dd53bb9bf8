use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ChangePointError;

/// `τ = mean + k·std` over reconstruction errors (population std).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub mean: f64,
    pub std: f64,
    pub k: f64,
    pub tau: f64,
}

/// Half-open record interval `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start < end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.start..self.end).contains(&i)
    }
}

/// Run-merging rule, in window units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationParams {
    /// Runs separated by fewer than this many unflagged windows are merged.
    pub min_gap: usize,
    /// Merged runs shorter than this many windows are dropped.
    pub min_len: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self { min_gap: 8, min_len: 16 }
    }
}

pub fn compute_threshold(errors: &[f64], k: f64) -> Result<ThresholdSpec, ChangePointError> {
    if errors.is_empty() {
        return Err(ChangePointError::EmptyErrors);
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    let std = libm::sqrt(var);
    Ok(ThresholdSpec {
        mean,
        std,
        k,
        tau: mean + k * std,
    })
}

/// `error > τ`, strictly.
pub fn detect_changepoints(errors: &[f64], spec: &ThresholdSpec) -> Vec<bool> {
    errors.iter().map(|&e| e > spec.tau).collect()
}

/// Turns window flags into record segments.
///
/// Maximal runs of flagged windows are found, runs separated by fewer than `min_gap`
/// unflagged windows are merged, and runs shorter than `min_len` windows are dropped. Window
/// `i` covers records `[i, i + window)`, so a run `[a, b)` maps to `[a, b − 1 + window)`;
/// record extents that then overlap or touch are joined.
pub fn flags_to_segments(flags: &[bool], window: usize, min_gap: usize, min_len: usize) -> Vec<Segment> {
    let window = window.max(1);
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < flags.len() && flags[i] {
            i += 1;
        }
        match runs.last_mut() {
            Some(last) if start - last.1 < min_gap => last.1 = i,
            _ => runs.push((start, i)),
        }
    }
    let mut out: Vec<Segment> = Vec::new();
    for (a, b) in runs.into_iter().filter(|(a, b)| b - a >= min_len) {
        let seg = Segment::new(a, b - 1 + window);
        match out.last_mut() {
            Some(last) if seg.start <= last.end => last.end = last.end.max(seg.end),
            _ => out.push(seg),
        }
    }
    out
}

/// `mask[t] = 1` iff `t` lies inside a segment.
pub fn segments_to_mask(segments: &[Segment], len: usize) -> Vec<f64> {
    let mut mask = vec![0.0; len];
    for s in segments {
        mask[s.start.min(len)..s.end.min(len)].iter_mut().for_each(|m| *m = 1.0);
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == 'T').collect()
    }

    #[test]
    fn constant_errors_give_tau_equal_to_value() {
        let t = compute_threshold(&[0.7; 5], 4.0).unwrap();
        assert_eq!(t.std, 0.0);
        assert_eq!(t.tau, 0.7);
    }

    #[test]
    fn hand_statistics() {
        let t = compute_threshold(&[0.0, 0.0, 0.0, 4.0], 1.0).unwrap();
        assert_eq!(t.mean, 1.0);
        assert!((t.std - libm::sqrt(3.0)).abs() < 1e-15);
        assert!((t.tau - 2.732_050_807_568_877).abs() < 1e-12);
        assert_eq!(detect_changepoints(&[0.0, 0.0, 0.0, 4.0], &t), vec![false, false, false, true]);
    }

    #[test]
    fn empty_errors_rejected() {
        assert_eq!(compute_threshold(&[], 3.0), Err(ChangePointError::EmptyErrors));
    }

    #[test]
    fn ties_are_not_changepoints() {
        let t = ThresholdSpec {
            mean: 1.0,
            std: 0.5,
            k: 2.0,
            tau: 2.0,
        };
        assert_eq!(detect_changepoints(&[2.0, 1.9, 2.1], &t), vec![false, false, true]);
        assert!(detect_changepoints(&[0.1, 0.2], &t).iter().all(|f| !f));
    }

    #[test]
    fn k_is_monotone() {
        let e = [0.1, 0.5, 0.3, 0.9];
        let a = compute_threshold(&e, 1.0).unwrap();
        let b = compute_threshold(&e, 2.5).unwrap();
        assert!(a.tau <= b.tau);
    }

    #[test]
    fn runs_become_segments() {
        assert_eq!(
            flags_to_segments(&flags("FFTTFTF"), 1, 0, 1),
            vec![Segment::new(2, 4), Segment::new(5, 6)]
        );
        assert_eq!(flags_to_segments(&flags("FFTTFTF"), 1, 2, 1), vec![Segment::new(2, 6)]);
        assert!(flags_to_segments(&flags("FFFF"), 1, 0, 0).is_empty());
    }

    #[test]
    fn short_runs_dropped_and_windows_expand() {
        assert_eq!(flags_to_segments(&flags("TFFTTT"), 1, 0, 2), vec![Segment::new(3, 6)]);
        // window 4: run [1,3) covers records [1, 6)
        assert_eq!(flags_to_segments(&flags("FTTFFFFFF"), 4, 0, 1), vec![Segment::new(1, 6)]);
        // extents that overlap after expansion are joined
        assert_eq!(flags_to_segments(&flags("TFFT"), 3, 0, 1), vec![Segment::new(0, 6)]);
    }

    #[test]
    fn mask_marks_segment_interiors() {
        let m = segments_to_mask(&[Segment::new(1, 3), Segment::new(5, 6)], 7);
        assert_eq!(m, vec![0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
    }
}
