//! Seeded zero-order-hold Gaussian noise, the model of the white-noise
//! generator injected through `c_noise`.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Default hold interval of one noise sample (1 µs).
pub const DEFAULT_HOLD: f64 = 1.0e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseSpec {
    /// RMS voltage of the source (volts).
    pub rms_voltage: f64,
    /// Duration each sample is held (seconds).
    pub hold_interval: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(rms_voltage: f64, seed: u64) -> Self {
        Self {
            rms_voltage,
            hold_interval: DEFAULT_HOLD,
            seed,
        }
    }

    pub fn silent() -> Self {
        Self::new(0.0, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rms_voltage.is_finite() && self.rms_voltage >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise rms {} must be >= 0",
                self.rms_voltage
            )));
        }
        if !(self.hold_interval.is_finite() && self.hold_interval > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise hold interval {} must be > 0",
                self.hold_interval
            )));
        }
        Ok(())
    }

    /// Same source with a different seed.
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Piecewise-constant noise voltage: sample `k` is active on
/// `[k·hold, (k+1)·hold)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSignal {
    pub hold_interval: f64,
    pub samples: Vec<f64>,
}

impl NoiseSignal {
    /// Value of the signal at time `t` (clamped to the last sample).
    pub fn at(&self, t: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let k = libm::floor(t / self.hold_interval) as usize;
        self.samples[k.min(self.samples.len() - 1)]
    }
}

/// Number of hold intervals needed to cover `duration`, tolerant of the
/// rounding error in e.g. `0.02 / 1e-6`.
pub fn hold_count(duration: f64, hold: f64) -> usize {
    let k = duration / hold;
    let r = libm::round(k);
    if (k - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        libm::ceil(k) as usize
    }
}

pub fn generate_noise(spec: &NoiseSpec, duration: f64) -> Result<NoiseSignal> {
    spec.validate()?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise duration {duration} must be > 0"
        )));
    }
    let count = hold_count(duration, spec.hold_interval);
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let samples = (0..count)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            spec.rms_voltage * z
        })
        .collect();
    Ok(NoiseSignal {
        hold_interval: spec.hold_interval,
        samples,
    })
}
