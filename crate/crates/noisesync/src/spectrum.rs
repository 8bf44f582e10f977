//! One-sided periodograms of trace channels.

use noisesync_core::analysis::{Spectrum, WindowKind};
use noisesync_core::{Error, Trace};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub const MIN_SAMPLES: usize = 16;

/// Periodogram of oscillator `osc` over the whole trace.
pub fn periodogram(
    trace: &Trace,
    osc: usize,
    window: WindowKind,
    zero_pad_factor: usize,
) -> Result<Spectrum, Error> {
    periodogram_from(trace, osc, 0.0, window, zero_pad_factor)
}

/// Periodogram of oscillator `osc` using only samples at `t >= t_start`.
pub fn periodogram_from(
    trace: &Trace,
    osc: usize,
    t_start: f64,
    window: WindowKind,
    zero_pad_factor: usize,
) -> Result<Spectrum, Error> {
    let channel = trace.v_samples.get(osc).ok_or_else(|| {
        Error::InvalidConfig(format!("oscillator {osc} out of range for {}", trace.n()))
    })?;
    let first = trace.times.partition_point(|&t| t < t_start);
    periodogram_samples(&channel[first..], trace.dt_out, window, zero_pad_factor)
}

/// Magnitude-squared DFT of the mean-removed, windowed samples, zero-padded
/// to `len·zero_pad_factor` points. Power is one-sided and normalised so that
/// it sums to the energy of the windowed signal.
pub fn periodogram_samples(
    samples: &[f64],
    dt: f64,
    window: WindowKind,
    zero_pad_factor: usize,
) -> Result<Spectrum, Error> {
    let len = samples.len();
    if len < MIN_SAMPLES {
        return Err(Error::TooShort {
            found: len,
            needed: MIN_SAMPLES,
        });
    }
    if zero_pad_factor == 0 {
        return Err(Error::InvalidConfig("zero_pad_factor must be >= 1".into()));
    }
    let mean = samples.iter().sum::<f64>() / len as f64;
    let w = window.coefficients(len);
    let padded = len * zero_pad_factor;
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex::new((x - mean) * w, 0.0))
        .chain(std::iter::repeat_n(Complex::new(0.0, 0.0), padded - len))
        .collect();
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);

    let half = padded / 2;
    let df = 1.0 / (padded as f64 * dt);
    let mut freqs = Vec::with_capacity(half + 1);
    let mut power = Vec::with_capacity(half + 1);
    for (k, x) in buf.iter().take(half + 1).enumerate() {
        let edge = k == 0 || (padded.is_multiple_of(2) && k == half);
        let weight = if edge { 1.0 } else { 2.0 };
        freqs.push(k as f64 * df);
        power.push(weight * x.norm_sqr() / padded as f64);
    }
    Ok(Spectrum {
        freqs,
        power,
        window_length: len as f64 * dt,
        window_kind: window,
    })
}
