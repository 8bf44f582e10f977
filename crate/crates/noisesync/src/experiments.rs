//! Lock statistics over seed sets, noise-threshold and critical-coupling
//! searches, parameter sweeps and the phase-versus-noise curve.
//!
//! Every probe reuses the same seed list, so comparisons between probe
//! levels share their random numbers. Seeds fan out over rayon; results are
//! collected in seed order and therefore never depend on scheduling.

use noisesync_core::analysis::{
    circular_mean, circular_std_deg, lock_report, phase_report_window, LockReport,
};
use noisesync_core::sim::{initial_state, simulate_from};
use noisesync_core::{Graph, NetworkSpec, SimConfig, Trace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::params::Params;
use crate::{noise_seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockCriteria {
    pub window_fraction: f64,
    pub eps_f: f64,
    pub eps_phi_deg: f64,
}

impl LockCriteria {
    pub fn evaluate(&self, trace: &Trace) -> Result<LockReport> {
        Ok(lock_report(
            trace,
            self.window_fraction,
            self.eps_f,
            self.eps_phi_deg,
        )?)
    }
}

/// A network plus everything needed to simulate and score it for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub net: NetworkSpec,
    pub cfg: SimConfig,
    pub hold_interval: f64,
    pub criteria: LockCriteria,
    /// Start every oscillator from oscillator 0's random initial state.
    pub shared_initial_state: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Locked(LockReport),
    Unlocked(LockReport),
    /// Too few troughs in the analysis window to judge.
    Undecided(String),
    /// The simulation itself failed (for example a zeno abort).
    Failed(String),
}

impl Outcome {
    pub fn is_locked(&self) -> bool {
        matches!(self, Outcome::Locked(_))
    }
}

impl Experiment {
    pub fn new(params: &Params, net: NetworkSpec) -> Result<Self> {
        Ok(Self {
            cfg: params.sim_config(&net)?,
            hold_interval: params.hold_interval,
            criteria: params.criteria(),
            shared_initial_state: false,
            net,
        })
    }

    pub fn simulate(&self, rms: f64, seed: u64) -> Result<Trace> {
        let noise = noisesync_core::NoiseSpec {
            rms_voltage: rms,
            hold_interval: self.hold_interval,
            seed: noise_seed(seed),
        };
        let mut init = initial_state(&self.net, seed);
        if self.shared_initial_state {
            let (v0, s0) = (init.v[0], init.s[0]);
            init.v.iter_mut().for_each(|v| *v = v0);
            init.s.iter_mut().for_each(|s| *s = s0);
        }
        Ok(simulate_from(&self.net, &noise, &self.cfg, init, seed)?)
    }

    pub fn outcome(&self, rms: f64, seed: u64) -> Outcome {
        match self.simulate(rms, seed) {
            Err(e) => Outcome::Failed(e.to_string()),
            Ok(trace) => self.score(&trace),
        }
    }

    pub fn score(&self, trace: &Trace) -> Outcome {
        match self.criteria.evaluate(trace) {
            Ok(r) if r.locked => Outcome::Locked(r),
            Ok(r) => Outcome::Unlocked(r),
            Err(e) => Outcome::Undecided(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockProbability {
    pub v_rms: f64,
    pub lock_probability: f64,
    pub locked: usize,
    /// Runs whose simulation aborted; they count as not locked.
    pub failed: usize,
    pub total: usize,
}

pub fn lock_probability(exp: &Experiment, rms: f64, seeds: &[u64]) -> Result<LockProbability> {
    if seeds.is_empty() {
        return Err(Error::Invalid("at least one seed is required".into()));
    }
    let outcomes: Vec<Outcome> = seeds.par_iter().map(|&s| exp.outcome(rms, s)).collect();
    let locked = outcomes.iter().filter(|o| o.is_locked()).count();
    let failed = outcomes
        .iter()
        .filter(|o| matches!(o, Outcome::Failed(_)))
        .count();
    Ok(LockProbability {
        v_rms: rms,
        lock_probability: locked as f64 / seeds.len() as f64,
        locked,
        failed,
        total: seeds.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Found,
    /// The predicate already holds at the lower end of the range.
    BelowRange,
    /// The predicate fails at the upper end of the range.
    NoneFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub status: SearchStatus,
    /// Smallest probed rms where the quorum holds, if any.
    pub v_t_noise: Option<f64>,
    pub v_lo: f64,
    pub v_hi: f64,
    pub resolution: f64,
    pub quorum: f64,
    pub seeds: Vec<u64>,
    /// Probes in evaluation order.
    pub probes: Vec<LockProbability>,
}

/// Bisection on rms for the smallest level where
/// `lock_probability ≥ quorum`.
pub fn find_noise_threshold(
    exp: &Experiment,
    v_lo: f64,
    v_hi: f64,
    resolution: f64,
    seeds: &[u64],
    quorum: f64,
) -> Result<ThresholdResult> {
    if !(v_lo >= 0.0 && v_lo < v_hi && v_hi.is_finite()) {
        return Err(Error::Invalid(format!(
            "need 0 <= v_lo < v_hi, got [{v_lo}, {v_hi}]"
        )));
    }
    if !(resolution > 0.0) {
        return Err(Error::Invalid("resolution must be positive".into()));
    }
    check_quorum(quorum)?;
    let mut probes = Vec::new();
    let mut probe = |v: f64| -> Result<bool> {
        let p = lock_probability(exp, v, seeds)?;
        let ok = p.lock_probability >= quorum;
        probes.push(p);
        Ok(ok)
    };
    let (status, v_t) = bisect(
        v_lo,
        v_hi,
        |lo, hi| hi - lo <= resolution,
        |lo, hi| 0.5 * (lo + hi),
        &mut probe,
    )?;
    Ok(ThresholdResult {
        status,
        v_t_noise: v_t,
        v_lo,
        v_hi,
        resolution,
        quorum,
        seeds: seeds.to_vec(),
        probes,
    })
}

/// Shared search skeleton: checks `hi` first, then `lo`, then halves.
fn bisect(
    lo: f64,
    hi: f64,
    done: impl Fn(f64, f64) -> bool,
    mid: impl Fn(f64, f64) -> f64,
    probe: &mut impl FnMut(f64) -> Result<bool>,
) -> Result<(SearchStatus, Option<f64>)> {
    if !probe(hi)? {
        return Ok((SearchStatus::NoneFound, None));
    }
    if probe(lo)? {
        return Ok((SearchStatus::BelowRange, Some(lo)));
    }
    let (mut lo, mut hi) = (lo, hi);
    while !done(lo, hi) {
        let m = mid(lo, hi);
        if probe(m)? {
            hi = m;
        } else {
            lo = m;
        }
    }
    Ok((SearchStatus::Found, Some(hi)))
}

fn check_quorum(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("quorum {q} outside (0, 1]")))
    }
}

/// Lock probabilities at `v_t − 2·resolution` (clamped at 0) and at `v_t`,
/// with the threshold's own seed set.
pub fn bracket_check(
    exp: &Experiment,
    r: &ThresholdResult,
) -> Result<Option<(LockProbability, LockProbability)>> {
    let Some(v_t) = r.v_t_noise else {
        return Ok(None);
    };
    let below = lock_probability(exp, (v_t - 2.0 * r.resolution).max(0.0), &r.seeds)?;
    let at = lock_probability(exp, v_t, &r.seeds)?;
    Ok(Some((below, at)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    Ok,
    TooFewPoints,
    /// All x values (or all y values) coincide.
    DegenerateVariance,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> std::result::Result<LinearFit, FitStatus> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(FitStatus::TooFewPoints);
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys[..n].iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let scale = mx.abs().max(1.0);
    if sxx <= 1e-24 * scale * scale || syy == 0.0 {
        return Err(FitStatus::DegenerateVariance);
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared: sxy * sxy / (sxx * syy),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointFlag {
    Ok,
    /// No value inside the searched range.
    Censored,
    /// The value sits at the lower end of the range (an upper bound only).
    BelowRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub value: Option<f64>,
    pub flag: PointFlag,
    pub search: ThresholdResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variable: String,
    pub variable_unit: String,
    pub measure: String,
    pub measure_unit: String,
    pub points: Vec<SweepPoint>,
    pub fit: Option<LinearFit>,
    pub fit_status: Option<FitStatus>,
    /// Every measured value strictly above the previous one.
    pub strictly_increasing: bool,
    /// Every measured value at most the previous one.
    pub non_increasing: bool,
}

impl SweepResult {
    fn new(
        variable: &str,
        variable_unit: &str,
        measure: &str,
        measure_unit: &str,
        points: Vec<SweepPoint>,
        want_fit: bool,
    ) -> Self {
        let complete = points.iter().all(|p| p.flag == PointFlag::Ok);
        let vals: Vec<f64> = points.iter().filter_map(|p| p.value).collect();
        let all_present = complete && vals.len() == points.len();
        let strictly_increasing = all_present && vals.windows(2).all(|w| w[1] > w[0]);
        let non_increasing = all_present && vals.windows(2).all(|w| w[1] <= w[0]);
        let x_spread = points.windows(2).any(|w| w[0].x != w[1].x);
        let (fit, fit_status) = if want_fit && !x_spread && points.len() > 1 {
            (None, Some(FitStatus::DegenerateVariance))
        } else if want_fit {
            let (xs, ys): (Vec<f64>, Vec<f64>) = points
                .iter()
                .filter(|p| p.flag == PointFlag::Ok)
                .filter_map(|p| p.value.map(|v| (p.x, v)))
                .unzip();
            match linear_fit(&xs, &ys) {
                Ok(f) => (Some(f), Some(FitStatus::Ok)),
                Err(s) => (None, Some(s)),
            }
        } else {
            (None, None)
        };
        Self {
            variable: variable.into(),
            variable_unit: variable_unit.into(),
            measure: measure.into(),
            measure_unit: measure_unit.into(),
            points,
            fit,
            fit_status,
            strictly_increasing,
            non_increasing,
        }
    }

    /// `(x, value, flag)` rows for plotting.
    pub fn rows(&self) -> Vec<(f64, Option<f64>, &'static str)> {
        self.points
            .iter()
            .map(|p| (p.x, p.value, p.flag.label()))
            .collect()
    }
}

impl PointFlag {
    pub fn label(self) -> &'static str {
        match self {
            PointFlag::Ok => "ok",
            PointFlag::Censored => "censored",
            PointFlag::BelowRange => "below-range",
        }
    }

    fn of(status: SearchStatus) -> Self {
        match status {
            SearchStatus::Found => PointFlag::Ok,
            SearchStatus::BelowRange => PointFlag::BelowRange,
            SearchStatus::NoneFound => PointFlag::Censored,
        }
    }
}

/// Range, resolution, seeds and quorum shared by the threshold sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub v_lo: f64,
    pub v_hi: f64,
    pub resolution: f64,
    pub seeds: Vec<u64>,
    pub quorum: f64,
}

impl ThresholdSearch {
    pub fn run(&self, exp: &Experiment) -> Result<ThresholdResult> {
        find_noise_threshold(
            exp,
            self.v_lo,
            self.v_hi,
            self.resolution,
            &self.seeds,
            self.quorum,
        )
    }
}

fn threshold_point(x: f64, exp: &Experiment, search: &ThresholdSearch) -> Result<SweepPoint> {
    let r = search.run(exp)?;
    Ok(SweepPoint {
        x,
        value: r.v_t_noise.filter(|_| r.status != SearchStatus::NoneFound),
        flag: PointFlag::of(r.status),
        search: r,
    })
}

/// Noise threshold of the uncoupled detuned pair for each amplitude `v_a`.
pub fn sweep_amplitude(
    params: &Params,
    amplitudes: &[f64],
    search: &ThresholdSearch,
) -> Result<SweepResult> {
    if amplitudes.len() < 3 {
        return Err(Error::Invalid(
            "an amplitude sweep needs at least 3 amplitudes".into(),
        ));
    }
    let points = amplitudes
        .iter()
        .map(|&v_a| {
            let mut p = params.clone();
            p.oscillator.v_a = v_a;
            let exp = Experiment::new(&p, p.uncoupled(2, None)?)?;
            threshold_point(v_a, &exp, search)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::new("v_a", "V", "v_t_noise", "V", points, true))
}

/// Noise threshold of `N` uncoupled oscillators with common noise, detune
/// spread linearly over `params.detune_spread`.
pub fn sweep_population(
    params: &Params,
    sizes: &[usize],
    search: &ThresholdSearch,
) -> Result<SweepResult> {
    if sizes.is_empty() {
        return Err(Error::Invalid(
            "population sweep needs at least one size".into(),
        ));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
        return Err(Error::Invalid(format!(
            "population size {n} < 2: lock is undefined"
        )));
    }
    if sizes.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid(
            "population sizes must be non-decreasing".into(),
        ));
    }
    let mut p = params.clone();
    p.noise_common = true;
    let points = sizes
        .iter()
        .map(|&n| {
            let exp = Experiment::new(&p, p.uncoupled(n, None)?)?;
            threshold_point(n as f64, &exp, search)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::new(
        "n",
        "oscillators",
        "v_t_noise",
        "V",
        points,
        false,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingProbe {
    pub c_c: f64,
    pub lock: LockProbability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub status: SearchStatus,
    /// Smallest probed coupling where the quorum holds.
    pub c_star: Option<f64>,
    pub v_rms: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    /// Search stops once `hi/lo ≤ 1 + ratio_resolution`.
    pub ratio_resolution: f64,
    pub quorum: f64,
    pub seeds: Vec<u64>,
    pub probes: Vec<CouplingProbe>,
}

/// Log-scale bisection on the per-edge coupling capacitance.
#[allow(clippy::too_many_arguments)]
pub fn find_critical_coupling(
    params: &Params,
    g: &Graph,
    rms: f64,
    c_lo: f64,
    c_hi: f64,
    ratio_resolution: f64,
    seeds: &[u64],
    quorum: f64,
) -> Result<CouplingResult> {
    if g.edges().is_empty() {
        return Err(Error::Invalid(
            "coupling search is undefined on a graph without edges".into(),
        ));
    }
    if !(c_lo > 0.0 && c_lo < c_hi && c_hi.is_finite()) {
        return Err(Error::Invalid(format!(
            "need 0 < c_lo < c_hi, got [{c_lo}, {c_hi}]"
        )));
    }
    if !(ratio_resolution > 0.0) {
        return Err(Error::Invalid("ratio_resolution must be positive".into()));
    }
    check_quorum(quorum)?;
    let mut probes = Vec::new();
    let mut probe = |c: f64| -> Result<bool> {
        let exp = Experiment::new(params, params.network(g, c, None)?)?;
        let lock = lock_probability(&exp, rms, seeds)?;
        let ok = lock.lock_probability >= quorum;
        probes.push(CouplingProbe { c_c: c, lock });
        Ok(ok)
    };
    let (status, c_star) = bisect(
        c_lo,
        c_hi,
        |lo, hi| hi / lo <= 1.0 + ratio_resolution,
        |lo, hi| (lo * hi).sqrt(),
        &mut probe,
    )?;
    Ok(CouplingResult {
        status,
        c_star,
        v_rms: rms,
        c_lo,
        c_hi,
        ratio_resolution,
        quorum,
        seeds: seeds.to_vec(),
        probes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseFlag {
    Ok,
    /// Some seeds did not lock; the mean uses the locked ones only.
    Partial,
    Unlocked,
    /// Requested rms lies below the supplied threshold.
    SubThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub v_rms: f64,
    /// Circular mean of oscillator 1's phase relative to oscillator 0.
    pub mean_deg: Option<f64>,
    /// Circular standard deviation of that phase across locked seeds.
    pub std_deg: Option<f64>,
    pub locked: usize,
    pub total: usize,
    pub flag: PhaseFlag,
    pub per_seed_deg: Vec<Option<f64>>,
}

/// Relative phase of a two-oscillator experiment as a function of rms.
/// Points below `threshold` are still computed but flagged.
pub fn phase_vs_noise(
    exp: &Experiment,
    rms_values: &[f64],
    seeds: &[u64],
    threshold: Option<f64>,
) -> Result<Vec<PhasePoint>> {
    if exp.net.n() != 2 {
        return Err(Error::Invalid(format!(
            "phase curve needs 2 oscillators, got {}",
            exp.net.n()
        )));
    }
    if seeds.is_empty() {
        return Err(Error::Invalid("at least one seed is required".into()));
    }
    rms_values
        .iter()
        .map(|&rms| {
            let per_seed: Vec<Option<f64>> = seeds
                .par_iter()
                .map(|&s| {
                    let trace = exp.simulate(rms, s).ok()?;
                    if !exp.score(&trace).is_locked() {
                        return None;
                    }
                    phase_report_window(&trace, 0, exp.criteria.window_fraction)
                        .ok()
                        .map(|r| r.phases_deg[1])
                })
                .collect();
            let locked: Vec<f64> = per_seed.iter().flatten().copied().collect();
            let (mean_deg, std_deg) = if locked.is_empty() {
                (None, None)
            } else {
                let (m, r) = circular_mean(locked.iter().copied());
                (Some(m), Some(circular_std_deg(r)))
            };
            let flag = match threshold {
                Some(t) if rms < t => PhaseFlag::SubThreshold,
                _ if locked.is_empty() => PhaseFlag::Unlocked,
                _ if locked.len() < seeds.len() => PhaseFlag::Partial,
                _ => PhaseFlag::Ok,
            };
            Ok(PhasePoint {
                v_rms: rms,
                mean_deg,
                std_deg,
                locked: locked.len(),
                total: seeds.len(),
                flag,
                per_seed_deg: per_seed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let xs = [1.5, 2.0, 2.5, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.11 * x - 0.02).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 0.11).abs() < 1e-12);
        assert!((f.intercept + 0.02).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_degenerate() {
        assert_eq!(
            linear_fit(&[2.0; 4], &[0.1, 0.2, 0.3, 0.4]),
            Err(FitStatus::DegenerateVariance)
        );
        assert_eq!(linear_fit(&[1.0], &[1.0]), Err(FitStatus::TooFewPoints));
    }

    #[test]
    fn fit_r_squared_oracle() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 0.0, 3.0, 2.0];
        let f = linear_fit(&xs, &ys).unwrap();
        // Direct evaluation of 1 − SS_res/SS_tot.
        let my = ys.iter().sum::<f64>() / 4.0;
        let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - f.slope * x - f.intercept).powi(2))
            .sum();
        assert!((f.r_squared - (1.0 - ss_res / ss_tot)).abs() < 1e-12);
    }

    fn sweep(values: &[Option<f64>]) -> SweepResult {
        let search = ThresholdResult {
            status: SearchStatus::Found,
            v_t_noise: None,
            v_lo: 0.0,
            v_hi: 1.0,
            resolution: 0.005,
            quorum: 0.8,
            seeds: vec![],
            probes: vec![],
        };
        let points = values
            .iter()
            .enumerate()
            .map(|(i, v)| SweepPoint {
                x: i as f64 + 1.0,
                value: *v,
                flag: if v.is_some() {
                    PointFlag::Ok
                } else {
                    PointFlag::Censored
                },
                search: search.clone(),
            })
            .collect();
        SweepResult::new("x", "", "y", "", points, true)
    }

    #[test]
    fn censored_points_excluded_from_fit() {
        let s = sweep(&[Some(0.1), None, Some(0.3), Some(0.4)]);
        assert_eq!(s.fit_status, Some(FitStatus::Ok));
        assert!(!s.strictly_increasing);
        let s = sweep(&[Some(0.1), Some(0.2), Some(0.3)]);
        assert!(s.strictly_increasing && !s.non_increasing);
        let s = sweep(&[Some(0.3), Some(0.3), Some(0.1)]);
        assert!(s.non_increasing && !s.strictly_increasing);
    }

    #[test]
    fn bisection_finds_step() {
        for step in [0.0, 0.1234, 0.5, 0.999, 2.0] {
            let mut calls = Vec::new();
            let mut probe = |v: f64| -> Result<bool> {
                calls.push(v);
                Ok(v >= step)
            };
            let (status, v) = bisect(
                0.0,
                1.0,
                |lo, hi| hi - lo <= 0.005,
                |a, b| 0.5 * (a + b),
                &mut probe,
            )
            .unwrap();
            match status {
                SearchStatus::Found => {
                    let v = v.unwrap();
                    assert!(v >= step && v - step <= 0.005, "step {step}: {v}");
                }
                SearchStatus::BelowRange => assert_eq!(step, 0.0),
                SearchStatus::NoneFound => assert!(step > 1.0),
            }
        }
    }
}
