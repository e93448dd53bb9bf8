//! Per-minute telemetry simulation with injectable faults.
//!
//! Four device profiles are aggregated into one `(energy, cpu, duration)` stream. The
//! eleven fault classes follow the four-family taxonomy (undervoltage, stuck sensor, MCU
//! over-temperature, buffer overflow). How each family shows up in the three channels is
//! synthetic; magnitudes are expressed in multiples of the nominal channel noise so the
//! classes stay separable at any scale.

mod fault;
mod generate;
mod record;

pub use fault::{inject_fault, Channel, FaultFamily, FaultParams, FaultSpec, SignatureConfig, UNDERVOLTAGE_FLOORS};
pub use generate::{
    fault_windows, generate_dataset, generate_dataset_with_windows, simulate_normal, DatasetSizes, DeviceProfile,
    FaultWindow, SimConfig,
};
pub use record::{Regime, TelemetryRecord, TimeSeriesDataset, FAULT_CLASSES, NORMAL_CLASS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("fault window [{start}, {start}+{length}) exceeds series length {len}")]
    WindowOutOfRange { start: usize, length: usize, len: usize },
    #[error("fault window overlaps an existing fault at index {0}")]
    Overlap(usize),
    #[error("fault class {0} is not in 1..=11")]
    InvalidClass(u8),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    #[error("record {index}: {reason}")]
    Invariant { index: usize, reason: &'static str },
}
