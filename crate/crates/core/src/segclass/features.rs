use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::SegClassError;
use crate::sim::{TimeSeriesDataset, NORMAL_CLASS};
use crate::tensor::Tensor2;

/// Statistics computed per channel, in feature order.
pub const STATS: [&str; 5] = ["mean", "std", "min", "max", "slope"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowFeatures {
    /// `[mean, std, min, max, slope]` for each channel in turn.
    pub features: Vec<f64>,
    pub label: u8,
}

/// Summary statistics of rows `start..start + len` of `x`. Std is the population std and
/// slope the least-squares slope against the row offset.
pub fn window_features(x: &Tensor2, start: usize, len: usize) -> Vec<f64> {
    let n = len as f64;
    let t_mean = (n - 1.0) / 2.0;
    let t_ss: f64 = (0..len).map(|t| (t as f64 - t_mean) * (t as f64 - t_mean)).sum();
    let mut out = Vec::with_capacity(x.cols() * STATS.len());
    for c in 0..x.cols() {
        let col = (start..start + len).map(|r| x.get(r, c));
        let mean = col.clone().sum::<f64>() / n;
        let var = col.clone().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let min = col.clone().fold(f64::INFINITY, f64::min);
        let max = col.clone().fold(f64::NEG_INFINITY, f64::max);
        let slope = if t_ss > 0.0 {
            col.enumerate().map(|(t, v)| (t as f64 - t_mean) * (v - mean)).sum::<f64>() / t_ss
        } else {
            0.0
        };
        out.extend([mean, libm::sqrt(var), min, max, slope]);
    }
    out
}

/// Most frequent label; ties go to the lower class id.
pub fn majority_label(labels: &[u8]) -> u8 {
    let mut counts = [0usize; NORMAL_CLASS as usize + 1];
    for &l in labels {
        counts[usize::from(l).min(NORMAL_CLASS as usize)] += 1;
    }
    let mut best = 0;
    for c in 1..counts.len() {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best as u8
}

/// One feature row per window position `0, stride, 2·stride, …`.
pub fn windowize(ds: &TimeSeriesDataset, window: usize, stride: usize) -> Result<Vec<WindowFeatures>, SegClassError> {
    if window == 0 || stride == 0 {
        return Err(SegClassError::Config("window and stride must be positive"));
    }
    if window > ds.len() {
        return Err(SegClassError::WindowTooLarge { window, len: ds.len() });
    }
    let x = ds.features();
    let labels = ds.class_labels();
    Ok((0..=ds.len() - window)
        .step_by(stride)
        .map(|s| WindowFeatures {
            features: window_features(&x, s, window),
            label: majority_label(&labels[s..s + window]),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Regime, TelemetryRecord};

    fn dataset(values: &[[f64; 3]]) -> TimeSeriesDataset {
        TimeSeriesDataset {
            records: values
                .iter()
                .enumerate()
                .map(|(t, v)| TelemetryRecord::normal(t as i64, v[0], v[1], v[2]))
                .collect(),
            regime: Regime::NormalOnly,
        }
    }

    #[test]
    fn constant_series() {
        let ds = dataset(&[[5.0, 0.5, 1.0]; 40]);
        let rows = windowize(&ds, 16, 8).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(r.features, rows[0].features);
            assert_eq!(r.features[1], 0.0);
            assert_eq!(r.features[4], 0.0);
            assert_eq!(r.label, NORMAL_CLASS);
        }
    }

    #[test]
    fn full_length_window_and_hand_stats() {
        let ds = dataset(&[[1.0, 0.1, 2.0], [2.0, 0.2, 2.0], [6.0, 0.3, 2.0]]);
        let rows = windowize(&ds, 3, 1).unwrap();
        assert_eq!(rows.len(), 1);
        let f = &rows[0].features;
        assert_eq!(f[0], 3.0);
        assert!((f[1] - libm::sqrt(14.0 / 3.0)).abs() < 1e-12);
        assert_eq!((f[2], f[3]), (1.0, 6.0));
        assert!((f[4] - 2.5).abs() < 1e-12);
        assert!((f[5] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn majority_ties_go_low() {
        assert_eq!(majority_label(&[3, 5, 5, 3]), 3);
        assert_eq!(majority_label(&[12, 2, 12]), 12);
    }

    #[test]
    fn window_too_large() {
        let ds = dataset(&[[1.0, 0.1, 1.0]; 3]);
        assert_eq!(
            windowize(&ds, 4, 1),
            Err(SegClassError::WindowTooLarge { window: 4, len: 3 })
        );
    }
}
