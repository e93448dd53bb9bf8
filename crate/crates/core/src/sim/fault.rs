use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{SimError, TelemetryRecord, FAULT_CLASSES};

/// Supply floor in volts for undervoltage classes 1..=6 (nominal supply 3.3 V).
pub const UNDERVOLTAGE_FLOORS: [f64; 6] = [3.0, 2.8, 2.6, 2.4, 2.3, 2.2];
const SUPPLY_VOLTS: f64 = 3.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultFamily {
    Undervoltage,
    SensorStuck,
    McuHighTemp,
    BufferOverflow,
}

impl FaultFamily {
    pub fn of_class(class_id: u8) -> Result<Self, SimError> {
        match class_id {
            1..=6 => Ok(Self::Undervoltage),
            7 | 8 => Ok(Self::SensorStuck),
            9 | 10 => Ok(Self::McuHighTemp),
            11 => Ok(Self::BufferOverflow),
            other => Err(SimError::InvalidClass(other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Energy,
    Cpu,
    Duration,
}

/// Fault signature magnitudes, in multiples of the nominal noise σ of the affected channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SignatureConfig {
    /// Energy drop per volt of supply sag.
    pub undervoltage_energy_per_volt: f64,
    /// Energy noise grows to `σ·(1 + gain·sag)`.
    pub undervoltage_noise_gain: f64,
    /// CPU load added by SPI stimulation while a sensor is stuck.
    pub stuck_cpu_shift: f64,
    /// Class 9 (high supply): energy, cpu plateau, duration shifts.
    pub mcu_high_voltage: [f64; 3],
    /// Class 10 (low supply): energy, cpu plateau, duration shifts.
    pub mcu_low_voltage: [f64; 3],
    /// Time constant of the CPU ramp, minutes.
    pub mcu_ramp_minutes: f64,
    pub overflow_duration_shift: f64,
    pub overflow_cpu_burst: f64,
}

impl Default for SignatureConfig {
    fn default() -> Self {
        Self {
            undervoltage_energy_per_volt: 40.0,
            undervoltage_noise_gain: 1.0,
            stuck_cpu_shift: 8.0,
            mcu_high_voltage: [8.0, 16.0, 8.0],
            mcu_low_voltage: [-8.0, 10.0, 14.0],
            mcu_ramp_minutes: 4.0,
            overflow_duration_shift: 25.0,
            overflow_cpu_burst: 12.0,
        }
    }
}

/// Resolved signature, in raw channel units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FaultParams {
    Undervoltage {
        floor_volts: f64,
        energy_shift: f64,
        extra_noise_std: f64,
    },
    SensorStuck {
        frozen: Channel,
        cpu_shift: f64,
    },
    McuHighTemp {
        energy_shift: f64,
        cpu_rise: f64,
        duration_shift: f64,
        ramp_minutes: f64,
    },
    BufferOverflow {
        duration_shift: f64,
        cpu_burst: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub class_id: u8,
    pub family: FaultFamily,
    pub params: FaultParams,
}

impl FaultSpec {
    /// Builds the signature of `class_id` given the nominal `(energy, cpu, duration)` noise σ.
    pub fn for_class(class_id: u8, sig: &SignatureConfig, sigma: [f64; 3]) -> Result<Self, SimError> {
        let family = FaultFamily::of_class(class_id)?;
        let [se, sc, sd] = sigma;
        let params = match family {
            FaultFamily::Undervoltage => {
                let floor = UNDERVOLTAGE_FLOORS[usize::from(class_id) - 1];
                let sag = SUPPLY_VOLTS - floor;
                let mult = 1.0 + sig.undervoltage_noise_gain * sag;
                FaultParams::Undervoltage {
                    floor_volts: floor,
                    energy_shift: -sig.undervoltage_energy_per_volt * sag * se,
                    extra_noise_std: se * libm::sqrt(mult * mult - 1.0),
                }
            }
            FaultFamily::SensorStuck => FaultParams::SensorStuck {
                frozen: if class_id == 7 { Channel::Energy } else { Channel::Duration },
                cpu_shift: sig.stuck_cpu_shift * sc,
            },
            FaultFamily::McuHighTemp => {
                let m = if class_id == 9 { sig.mcu_high_voltage } else { sig.mcu_low_voltage };
                FaultParams::McuHighTemp {
                    energy_shift: m[0] * se,
                    cpu_rise: m[1] * sc,
                    duration_shift: m[2] * sd,
                    ramp_minutes: sig.mcu_ramp_minutes,
                }
            }
            FaultFamily::BufferOverflow => FaultParams::BufferOverflow {
                duration_shift: sig.overflow_duration_shift * sd,
                cpu_burst: sig.overflow_cpu_burst * sc,
            },
        };
        Ok(Self {
            class_id,
            family,
            params,
        })
    }
}

/// Applies `spec` to `series[start..start + length]` and labels the window.
///
/// Fails if the window leaves the series or touches a record that is already faulty.
/// A zero-length window is a no-op.
pub fn inject_fault(
    series: &mut [TelemetryRecord],
    spec: &FaultSpec,
    start: usize,
    length: usize,
    seed: u64,
) -> Result<(), SimError> {
    if !(1..=FAULT_CLASSES).contains(&spec.class_id) {
        return Err(SimError::InvalidClass(spec.class_id));
    }
    if length == 0 {
        return Ok(());
    }
    let end = start.checked_add(length).filter(|&e| e <= series.len()).ok_or(SimError::WindowOutOfRange {
        start,
        length,
        len: series.len(),
    })?;
    if let Some(k) = series[start..end].iter().position(|r| r.anomaly) {
        return Err(SimError::Overlap(start + k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = &mut series[start..end];
    let first = window[0];
    for (k, r) in window.iter_mut().enumerate() {
        match spec.params {
            FaultParams::Undervoltage {
                energy_shift,
                extra_noise_std,
                ..
            } => {
                let z: f64 = StandardNormal.sample(&mut rng);
                r.energy += energy_shift + extra_noise_std * z;
            }
            FaultParams::SensorStuck { frozen, cpu_shift } => {
                match frozen {
                    Channel::Energy => r.energy = first.energy,
                    Channel::Cpu => r.cpu = first.cpu,
                    Channel::Duration => r.duration = first.duration,
                }
                if frozen != Channel::Cpu {
                    r.cpu += cpu_shift;
                }
            }
            FaultParams::McuHighTemp {
                energy_shift,
                cpu_rise,
                duration_shift,
                ramp_minutes,
            } => {
                let ramp = 1.0 - libm::exp(-((k + 1) as f64) / ramp_minutes.max(1e-9));
                r.energy += energy_shift;
                r.cpu += cpu_rise * ramp;
                r.duration += duration_shift * ramp;
            }
            FaultParams::BufferOverflow {
                duration_shift,
                cpu_burst,
            } => {
                r.duration += duration_shift;
                if k % 3 != 2 {
                    r.cpu += cpu_burst;
                }
            }
        }
        r.cpu = r.cpu.clamp(0.0, 1.0);
        r.duration = r.duration.max(1e-3);
        r.anomaly = true;
        r.fault_class = spec.class_id;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_normal, SimConfig};
    use alloc::vec::Vec;

    fn baseline() -> (Vec<TelemetryRecord>, SimConfig) {
        let cfg = SimConfig {
            length: 200,
            ..SimConfig::default()
        };
        (simulate_normal(&cfg).unwrap().records, cfg)
    }

    #[test]
    fn class_family_mapping() {
        for c in 1..=6 {
            assert_eq!(FaultFamily::of_class(c).unwrap(), FaultFamily::Undervoltage);
        }
        assert_eq!(FaultFamily::of_class(7).unwrap(), FaultFamily::SensorStuck);
        assert_eq!(FaultFamily::of_class(8).unwrap(), FaultFamily::SensorStuck);
        assert_eq!(FaultFamily::of_class(9).unwrap(), FaultFamily::McuHighTemp);
        assert_eq!(FaultFamily::of_class(10).unwrap(), FaultFamily::McuHighTemp);
        assert_eq!(FaultFamily::of_class(11).unwrap(), FaultFamily::BufferOverflow);
        assert!(FaultFamily::of_class(0).is_err());
        assert!(FaultFamily::of_class(12).is_err());
    }

    #[test]
    fn stuck_sensor_channel_is_constant() {
        let (mut s, cfg) = baseline();
        let spec = FaultSpec::for_class(7, &cfg.signatures, cfg.nominal_noise()).unwrap();
        inject_fault(&mut s, &spec, 40, 30, 1).unwrap();
        let v = s[40].energy;
        assert!(s[40..70].iter().all(|r| r.energy == v));
        assert!(s[40..70].iter().all(|r| r.anomaly && r.fault_class == 7));
        assert!(!s[39].anomaly && !s[70].anomaly);
    }

    #[test]
    fn zero_length_is_noop() {
        let (mut s, cfg) = baseline();
        let before = s.clone();
        let spec = FaultSpec::for_class(3, &cfg.signatures, cfg.nominal_noise()).unwrap();
        inject_fault(&mut s, &spec, 10, 0, 1).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn deeper_sag_moves_energy_further() {
        let (base, cfg) = baseline();
        let dev = |class: u8| {
            let mut s = base.clone();
            let spec = FaultSpec::for_class(class, &cfg.signatures, cfg.nominal_noise()).unwrap();
            inject_fault(&mut s, &spec, 50, 40, 3).unwrap();
            let d: f64 = (50..90).map(|i| base[i].energy - s[i].energy).sum();
            d / 40.0
        };
        assert!(dev(6) > dev(1));
        let devs: Vec<f64> = (1..=6).map(dev).collect();
        assert!(devs.windows(2).all(|w| w[1] > w[0]), "{devs:?}");
    }

    #[test]
    fn out_of_range_and_overlap_rejected() {
        let (mut s, cfg) = baseline();
        let spec = FaultSpec::for_class(11, &cfg.signatures, cfg.nominal_noise()).unwrap();
        assert!(matches!(
            inject_fault(&mut s, &spec, 190, 20, 0),
            Err(SimError::WindowOutOfRange { .. })
        ));
        inject_fault(&mut s, &spec, 100, 20, 0).unwrap();
        assert_eq!(inject_fault(&mut s, &spec, 110, 20, 0), Err(SimError::Overlap(110)));
    }
}
