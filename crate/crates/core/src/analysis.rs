//! Lock detection, trough-based relative phases and spectral peak metrics.
//!
//! The periodogram itself needs an FFT and lives in the `noisesync` crate;
//! the [`Spectrum`] type and peak/FWHM extraction are here.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::sim::Trace;
use crate::{Error, Result};

/// Troughs each oscillator needs inside the analysis window.
pub const MIN_TROUGHS: usize = 8;

/// Analysis defaults: trailing half of the trace, 0.1% period spread, 10°.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;
pub const DEFAULT_EPS_F: f64 = 1.0e-3;
pub const DEFAULT_EPS_PHI_DEG: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum WindowKind {
    Rectangular,
    Hann,
}

impl WindowKind {
    pub fn label(self) -> &'static str {
        match self {
            WindowKind::Rectangular => "rectangular",
            WindowKind::Hann => "hann",
        }
    }

    /// Symmetric window coefficients of length `len`.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Rectangular => alloc::vec![1.0; len],
            WindowKind::Hann => {
                if len < 2 {
                    return alloc::vec![1.0; len];
                }
                let denom = (len - 1) as f64;
                (0..len)
                    .map(|k| 0.5 - 0.5 * libm::cos(2.0 * PI * k as f64 / denom))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Duration of the analysed segment (seconds).
    pub window_length: f64,
    pub window_kind: WindowKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeakReport {
    pub f_peak: f64,
    pub fwhm: f64,
}

/// Highest non-DC bin and its full width at half maximum, with the half-power
/// crossings linearly interpolated between grid points.
pub fn peak_fwhm(spec: &Spectrum) -> Result<PeakReport> {
    let p = &spec.power;
    if p.len() < 3 || spec.freqs.len() != p.len() {
        return Err(Error::TooShort {
            found: p.len(),
            needed: 3,
        });
    }
    let (k, &pk) =
        p.iter().enumerate().skip(1).fold(
            (1, &p[1]),
            |best, cur| if *cur.1 > *best.1 { cur } else { best },
        );
    if k + 1 == p.len() || !(pk > 0.0) {
        return Err(Error::PeakAtBoundary);
    }
    let half = 0.5 * pk;
    let f = &spec.freqs;
    let interp = |a: usize, b: usize| f[a] + (half - p[a]) / (p[b] - p[a]) * (f[b] - f[a]);

    let mut left = None;
    for j in (0..k).rev() {
        if p[j] <= half {
            left = Some(interp(j, j + 1));
            break;
        }
    }
    let mut right = None;
    for j in (k + 1)..p.len() {
        if p[j] <= half {
            right = Some(interp(j - 1, j));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(PeakReport {
            f_peak: f[k],
            fwhm: r - l,
        }),
        _ => Err(Error::PeakAtBoundary),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LockReport {
    pub locked: bool,
    /// Mean inter-trough interval per oscillator (seconds).
    pub mean_period: Vec<f64>,
    pub max_rel_period_spread: f64,
    /// Largest circular standard deviation of per-cycle pairwise phase
    /// differences (degrees).
    pub phase_std_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseReport {
    pub reference: usize,
    /// Mean trough spacing of the reference oscillator (seconds).
    pub period_t: f64,
    /// Relative phase of each oscillator in `[0, 360)`.
    pub phases_deg: Vec<f64>,
    /// Time offset corresponding to each phase, in `[0, period_t)`.
    pub delta_t: Vec<f64>,
}

fn window_troughs(trace: &Trace, window_fraction: f64) -> Result<Vec<Vec<f64>>> {
    let start = trace.t_end * (1.0 - window_fraction);
    (0..trace.n())
        .map(|i| {
            let t: Vec<f64> = trace
                .troughs(i)
                .into_iter()
                .filter(|&t| t >= start)
                .collect();
            if t.len() < MIN_TROUGHS {
                Err(Error::InsufficientTroughs {
                    oscillator: i,
                    found: t.len(),
                    needed: MIN_TROUGHS,
                })
            } else {
                Ok(t)
            }
        })
        .collect()
}

fn mean_spacing(t: &[f64]) -> f64 {
    (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64
}

/// Signed offset from `t` to the nearest element of the sorted `others`.
fn nearest_offset(others: &[f64], t: f64) -> f64 {
    let k = others.partition_point(|&x| x < t);
    let mut best = f64::INFINITY;
    for j in [k.wrapping_sub(1), k] {
        if let Some(&x) = others.get(j) {
            if (x - t).abs() < best.abs() {
                best = x - t;
            }
        }
    }
    best
}

/// Resultant of unit vectors at the given angles (degrees): `(mean_deg, R)`.
pub fn circular_mean(angles_deg: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut c, mut s, mut n) = (0.0, 0.0, 0usize);
    for a in angles_deg {
        let r = a.to_radians();
        c += libm::cos(r);
        s += libm::sin(r);
        n += 1;
    }
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = libm::atan2(s, c).to_degrees();
    let r = (libm::sqrt(c * c + s * s) / n as f64).min(1.0);
    (wrap_deg(mean), r)
}

/// Circular standard deviation `sqrt(−2 ln R)` in degrees.
pub fn circular_std_deg(r: f64) -> f64 {
    if r >= 1.0 {
        return 0.0;
    }
    if r <= 0.0 {
        return f64::INFINITY;
    }
    libm::sqrt(-2.0 * libm::log(r)).to_degrees()
}

/// Reduces an angle to `[0, 360)`.
pub fn wrap_deg(a: f64) -> f64 {
    let r = libm::fmod(a, 360.0);
    let w = if r < 0.0 { r + 360.0 } else { r };
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

pub fn lock_report(
    trace: &Trace,
    window_fraction: f64,
    eps_f: f64,
    eps_phi_deg: f64,
) -> Result<LockReport> {
    let troughs = window_troughs(trace, window_fraction)?;
    let mean_period: Vec<f64> = troughs.iter().map(|t| mean_spacing(t)).collect();
    let grand = mean_period.iter().sum::<f64>() / mean_period.len() as f64;
    let lo = mean_period.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mean_period
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / grand;

    let mut phase_std: f64 = 0.0;
    for i in 0..troughs.len() {
        for j in (i + 1)..troughs.len() {
            let period = mean_period[i];
            let (_, r) = circular_mean(
                troughs[i]
                    .iter()
                    .map(|&t| nearest_offset(&troughs[j], t) / period * 360.0),
            );
            phase_std = phase_std.max(circular_std_deg(r));
        }
    }
    Ok(LockReport {
        locked: spread < eps_f && phase_std < eps_phi_deg,
        mean_period,
        max_rel_period_spread: spread,
        phase_std_deg: phase_std,
    })
}

/// [`lock_report`] with the default window and thresholds.
pub fn lock_report_default(trace: &Trace) -> Result<LockReport> {
    lock_report(
        trace,
        DEFAULT_WINDOW_FRACTION,
        DEFAULT_EPS_F,
        DEFAULT_EPS_PHI_DEG,
    )
}

/// Relative phases from trough timing over the default trailing window.
pub fn phase_report(trace: &Trace, reference: usize) -> Result<PhaseReport> {
    phase_report_window(trace, reference, DEFAULT_WINDOW_FRACTION)
}

/// For every reference trough in the window, the signed offset to the
/// nearest trough of oscillator `i`, scaled by the reference period to
/// degrees and averaged on the circle.
pub fn phase_report_window(
    trace: &Trace,
    reference: usize,
    window_fraction: f64,
) -> Result<PhaseReport> {
    if reference >= trace.n() {
        return Err(Error::InvalidConfig(alloc::format!(
            "reference {reference} out of range for {} oscillators",
            trace.n()
        )));
    }
    let window = window_troughs(trace, window_fraction)?;
    let period = mean_spacing(&window[reference]);
    let mut phases = Vec::with_capacity(trace.n());
    let mut delta_t = Vec::with_capacity(trace.n());
    for i in 0..trace.n() {
        let all = trace.troughs(i);
        let phase = if i == reference {
            0.0
        } else {
            circular_mean(
                window[reference]
                    .iter()
                    .map(|&t| nearest_offset(&all, t) / period * 360.0),
            )
            .0
        };
        phases.push(phase);
        delta_t.push(phase / 360.0 * period);
    }
    Ok(PhaseReport {
        reference,
        period_t: period,
        phases_deg: phases,
        delta_t,
    })
}
