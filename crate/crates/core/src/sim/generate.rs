use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::fault::{inject_fault, FaultSpec, SignatureConfig};
use super::{Regime, SimError, TelemetryRecord, TimeSeriesDataset, FAULT_CLASSES};

const MINUTES_PER_DAY: f64 = 1440.0;

/// Baseline behaviour of one monitored device.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub energy_mean: f64,
    pub energy_noise: f64,
    pub cpu_mean: f64,
    pub cpu_noise: f64,
    pub duration_mean: f64,
    pub duration_noise: f64,
}

impl DeviceProfile {
    pub fn testbed() -> Vec<DeviceProfile> {
        let d = |e, se, c, d, sd| DeviceProfile {
            energy_mean: e,
            energy_noise: se,
            cpu_mean: c,
            cpu_noise: 0.02,
            duration_mean: d,
            duration_noise: sd,
        };
        vec![
            // two oven-temperature monitors, one smoke and one humidity monitor
            d(120.0, 2.0, 0.35, 1.20, 0.05),
            d(115.0, 2.0, 0.33, 1.15, 0.05),
            d(80.0, 1.5, 0.25, 0.90, 0.04),
            d(75.0, 1.5, 0.22, 0.85, 0.04),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Number of per-minute records.
    pub length: usize,
    /// Fraction of mixed-regime steps covered by fault windows.
    pub fault_rate: f64,
    pub seed: u64,
    /// Multiplies every noise σ and the diurnal amplitude; 0 gives a constant series.
    pub noise_scale: f64,
    /// Relative amplitude of the daily CPU cycle.
    pub diurnal_amplitude: f64,
    pub devices: Vec<DeviceProfile>,
    pub signatures: SignatureConfig,
    /// Inclusive fault window length range for the mixed regime, minutes.
    pub mixed_window: (usize, usize),
    /// Inclusive fault window length range for the anomaly-only regime, minutes.
    pub anomaly_window: (usize, usize),
    pub start_timestamp: i64,
    pub interval_secs: i64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            length: 50_000,
            fault_rate: 0.01,
            seed: 0,
            noise_scale: 1.0,
            diurnal_amplitude: 0.05,
            devices: DeviceProfile::testbed(),
            signatures: SignatureConfig::default(),
            mixed_window: (10, 60),
            anomaly_window: (300, 700),
            start_timestamp: 1_700_000_000,
            interval_secs: 60,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.fault_rate) {
            return Err(SimError::InvalidConfig("fault_rate must lie in [0, 1]"));
        }
        if self.devices.is_empty() {
            return Err(SimError::InvalidConfig("at least one device is required"));
        }
        if self.noise_scale < 0.0 || self.diurnal_amplitude < 0.0 {
            return Err(SimError::InvalidConfig("noise levels must be non-negative"));
        }
        for (lo, hi) in [self.mixed_window, self.anomaly_window] {
            if lo == 0 || lo > hi {
                return Err(SimError::InvalidConfig("window range must satisfy 1 ≤ min ≤ max"));
            }
        }
        if self.interval_secs <= 0 {
            return Err(SimError::InvalidConfig("interval_secs must be positive"));
        }
        Ok(())
    }

    /// Configured mean of the aggregated `(energy, cpu, duration)` channels.
    pub fn channel_means(&self) -> [f64; 3] {
        let n = self.devices.len() as f64;
        [
            self.devices.iter().map(|d| d.energy_mean).sum(),
            self.devices.iter().map(|d| d.cpu_mean).sum::<f64>() / n,
            self.devices.iter().map(|d| d.duration_mean).sum::<f64>() / n,
        ]
    }

    /// Noise σ of the aggregated channels at `noise_scale = 1`.
    pub fn nominal_noise(&self) -> [f64; 3] {
        let n = self.devices.len() as f64;
        let rss = |f: fn(&DeviceProfile) -> f64| libm::sqrt(self.devices.iter().map(|d| f(d) * f(d)).sum());
        [
            rss(|d| d.energy_noise),
            rss(|d| d.cpu_noise) / n,
            rss(|d| d.duration_noise) / n,
        ]
    }
}

/// Dataset sizes for the three regimes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSizes {
    pub anomaly_only: usize,
    pub normal_only: usize,
    pub mixed: usize,
}

impl DatasetSizes {
    /// Default sizes for single-machine runs.
    pub const fn desk() -> Self {
        Self {
            anomaly_only: 8_432,
            normal_only: 50_000,
            mixed: 50_000,
        }
    }

    /// Sizes of the original testbed capture.
    pub const fn full() -> Self {
        Self {
            anomaly_only: 8_432,
            normal_only: 740_448,
            mixed: 718_444,
        }
    }

    pub fn for_regime(&self, regime: Regime) -> usize {
        match regime {
            Regime::AnomalyOnly => self.anomaly_only,
            Regime::NormalOnly => self.normal_only,
            Regime::Mixed => self.mixed,
        }
    }
}

/// An injected fault: records `[start, start + length)` carry `class_id`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultWindow {
    pub start: usize,
    pub length: usize,
    pub class_id: u8,
}

impl FaultWindow {
    pub fn end(&self) -> usize {
        self.start + self.length
    }
}

/// Stationary fault-free telemetry.
pub fn simulate_normal(cfg: &SimConfig) -> Result<TimeSeriesDataset, SimError> {
    cfg.validate()?;
    if cfg.length == 0 {
        return Err(SimError::InvalidConfig("length must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(TimeSeriesDataset {
        records: baseline(cfg, &mut rng),
        regime: Regime::NormalOnly,
    })
}

fn baseline(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Vec<TelemetryRecord> {
    let n = cfg.devices.len() as f64;
    let s = cfg.noise_scale;
    let minutes_per_step = cfg.interval_secs as f64 / 60.0;
    (0..cfg.length)
        .map(|t| {
            let phase = TAU * ((t as f64 * minutes_per_step) % MINUTES_PER_DAY) / MINUTES_PER_DAY;
            let daily = 1.0 + cfg.diurnal_amplitude * s * libm::sin(phase);
            let (mut energy, mut cpu, mut duration) = (0.0, 0.0, 0.0);
            for d in &cfg.devices {
                let z: [f64; 3] = [
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                ];
                energy += d.energy_mean + d.energy_noise * s * z[0];
                cpu += d.cpu_mean * daily + d.cpu_noise * s * z[1];
                duration += d.duration_mean + d.duration_noise * s * z[2];
            }
            TelemetryRecord::normal(
                cfg.start_timestamp + t as i64 * cfg.interval_secs,
                energy,
                (cpu / n).clamp(0.0, 1.0),
                (duration / n).max(1e-3),
            )
        })
        .collect()
}

/// Generates a dataset for `regime`; see [`generate_dataset_with_windows`].
pub fn generate_dataset(regime: Regime, cfg: &SimConfig) -> Result<TimeSeriesDataset, SimError> {
    generate_dataset_with_windows(regime, cfg).map(|(d, _)| d)
}

/// Generates a dataset and reports the injected fault windows.
///
/// * normal-only: [`simulate_normal`].
/// * anomaly-only: back-to-back fault windows; each round visits all eleven classes in a
///   shuffled order.
/// * mixed: a normal baseline with non-overlapping windows of uniformly random class,
///   covering about `fault_rate` of the steps.
pub fn generate_dataset_with_windows(
    regime: Regime,
    cfg: &SimConfig,
) -> Result<(TimeSeriesDataset, Vec<FaultWindow>), SimError> {
    let mut ds = simulate_normal(cfg)?;
    // independent stream for fault placement so the baseline does not depend on it
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_fa17_0000_0001);
    let sigma = cfg.nominal_noise();
    let windows = match regime {
        Regime::NormalOnly => Vec::new(),
        Regime::AnomalyOnly => {
            if cfg.length < usize::from(FAULT_CLASSES) {
                return Err(SimError::InvalidConfig("anomaly-only series must hold one step per class"));
            }
            back_to_back(cfg.length, cfg.anomaly_window, &mut rng)
        }
        Regime::Mixed => sporadic(cfg.length, cfg.fault_rate, cfg.mixed_window, &mut rng),
    };
    for w in &windows {
        let spec = FaultSpec::for_class(w.class_id, &cfg.signatures, sigma)?;
        inject_fault(&mut ds.records, &spec, w.start, w.length, rng.gen())?;
    }
    ds.regime = regime;
    Ok((ds, windows))
}

fn back_to_back(len: usize, (lo, hi): (usize, usize), rng: &mut ChaCha8Rng) -> Vec<FaultWindow> {
    let mut out = Vec::new();
    let mut pos = 0;
    let mut first_round = true;
    while pos < len {
        let mut classes: Vec<u8> = (1..=FAULT_CLASSES).collect();
        classes.shuffle(rng);
        for (k, &class_id) in classes.iter().enumerate() {
            if pos >= len {
                break;
            }
            // during the first round keep room for the classes still to come
            let reserve = if first_round { classes.len() - k - 1 } else { 0 };
            let length = rng.gen_range(lo..=hi).min(len - pos - reserve).max(1);
            out.push(FaultWindow {
                start: pos,
                length,
                class_id,
            });
            pos += length;
        }
        first_round = false;
    }
    out
}

fn sporadic(len: usize, rate: f64, (lo, hi): (usize, usize), rng: &mut ChaCha8Rng) -> Vec<FaultWindow> {
    let target = libm::round(rate * len as f64) as usize;
    // occupied[i] marks fault steps; windows also keep one free step between them
    let mut occupied = vec![false; len];
    let mut out = Vec::new();
    let mut placed = 0;
    'place: while placed < target {
        let mut length = rng.gen_range(lo..=hi);
        if placed + length > target {
            length = target - placed;
        }
        if length < lo || length > len {
            break;
        }
        for _ in 0..1000 {
            let start = rng.gen_range(0..=len - length);
            let guard_lo = start.saturating_sub(1);
            let guard_hi = (start + length + 1).min(len);
            if occupied[guard_lo..guard_hi].iter().any(|&o| o) {
                continue;
            }
            occupied[start..start + length].iter_mut().for_each(|o| *o = true);
            out.push(FaultWindow {
                start,
                length,
                class_id: rng.gen_range(1..=FAULT_CLASSES),
            });
            placed += length;
            continue 'place;
        }
        break;
    }
    out.sort_by_key(|w| w.start);
    out
}

/// Maximal runs of identical fault labels.
pub fn fault_windows(ds: &TimeSeriesDataset) -> Vec<FaultWindow> {
    let mut out: Vec<FaultWindow> = Vec::new();
    for (i, r) in ds.records.iter().enumerate() {
        if !r.anomaly {
            continue;
        }
        match out.last_mut() {
            Some(w) if w.end() == i && w.class_id == r.fault_class => w.length += 1,
            _ => out.push(FaultWindow {
                start: i,
                length: 1,
                class_id: r.fault_class,
            }),
        }
    }
    out
}
