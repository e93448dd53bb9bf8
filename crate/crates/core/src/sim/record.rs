use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::tensor::Tensor2;

/// Label of a step with no fault.
pub const NORMAL_CLASS: u8 = 12;
/// Number of fault classes; fault labels are `1..=FAULT_CLASSES`.
pub const FAULT_CLASSES: u8 = 11;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    pub energy: f64,
    /// Fraction of CPU time in `[0, 1]`.
    pub cpu: f64,
    /// Seconds per instance, strictly positive.
    pub duration: f64,
    pub anomaly: bool,
    /// `1..=11` for faults, [`NORMAL_CLASS`] otherwise.
    pub fault_class: u8,
}

impl TelemetryRecord {
    pub fn normal(timestamp: i64, energy: f64, cpu: f64, duration: f64) -> Self {
        Self {
            timestamp,
            energy,
            cpu,
            duration,
            anomaly: false,
            fault_class: NORMAL_CLASS,
        }
    }

    #[inline]
    pub fn features(&self) -> [f64; 3] {
        [self.energy, self.cpu, self.duration]
    }

    pub fn check(&self) -> Result<(), &'static str> {
        if !(self.energy.is_finite() && self.cpu.is_finite() && self.duration.is_finite()) {
            return Err("non-finite channel value");
        }
        if !(0.0..=1.0).contains(&self.cpu) {
            return Err("cpu outside [0, 1]");
        }
        if self.duration <= 0.0 {
            return Err("duration must be positive");
        }
        if !(1..=NORMAL_CLASS).contains(&self.fault_class) {
            return Err("fault_class outside 1..=12");
        }
        if self.anomaly != (self.fault_class != NORMAL_CLASS) {
            return Err("anomaly flag disagrees with fault_class");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    AnomalyOnly,
    NormalOnly,
    Mixed,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::AnomalyOnly => "anomaly_only",
            Regime::NormalOnly => "normal_only",
            Regime::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesDataset {
    pub records: Vec<TelemetryRecord>,
    pub regime: Regime,
}

impl TimeSeriesDataset {
    pub fn new(records: Vec<TelemetryRecord>, regime: Regime) -> Result<Self, SimError> {
        let ds = Self { records, regime };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks every record invariant, timestamp order and the regime's label contract.
    pub fn validate(&self) -> Result<(), SimError> {
        for (index, r) in self.records.iter().enumerate() {
            r.check().map_err(|reason| SimError::Invariant { index, reason })?;
            if index > 0 && r.timestamp <= self.records[index - 1].timestamp {
                return Err(SimError::Invariant {
                    index,
                    reason: "timestamps not strictly increasing",
                });
            }
            match self.regime {
                Regime::NormalOnly if r.anomaly => {
                    return Err(SimError::Invariant {
                        index,
                        reason: "anomalous record in normal-only dataset",
                    })
                }
                Regime::AnomalyOnly if !r.anomaly => {
                    return Err(SimError::Invariant {
                        index,
                        reason: "normal record in anomaly-only dataset",
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// `T×3` matrix of `(energy, cpu, duration)`.
    pub fn features(&self) -> Tensor2 {
        let mut t = Tensor2::zeros(self.len(), 3);
        for (i, r) in self.records.iter().enumerate() {
            t.row_mut(i).copy_from_slice(&r.features());
        }
        t
    }

    pub fn class_labels(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.fault_class).collect()
    }

    pub fn anomaly_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.anomaly).count() as f64 / self.len() as f64
    }

    /// Records `[start, end)` under the same regime tag.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            records: self.records[start..end].to_vec(),
            regime: self.regime,
        }
    }
}
