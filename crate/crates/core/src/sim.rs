//! Event-driven integrator for the hybrid oscillator dynamics.
//!
//! Between comparator switches and noise-sample boundaries the node voltages
//! follow the linear system `M·dv/dt = D·(u − v)` with `D = diag(1/r_f)` and
//! `u_i = s_i·v_a_i`. It is advanced with fixed-step classical RK4 on a grid
//! aligned to the noise hold boundaries. Threshold crossings are localized by
//! bisection on the RK4 sub-step, and each noise jump `ΔV_N` moves the node
//! voltages by `M⁻¹·c_N·ΔV_N` (charge conservation through `c_noise`).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::model::NetworkSpec;
use crate::noise::{generate_noise, hold_count, NoiseSignal, NoiseSpec};
use crate::{mix_seed, Error, Result};

const INIT_STREAM: u64 = 0x1D17;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub t_end: f64,
    /// Upper bound on the RK4 step.
    pub dt: f64,
    /// Output sampling interval.
    pub dt_out: f64,
    /// Bisection tolerance for switching times.
    pub crossing_tol: f64,
    /// Minimum allowed spacing between two switches of one oscillator.
    pub zeno_guard: f64,
}

impl SimConfig {
    /// Defaults scaled to the fastest oscillator in `net`: `dt = T/2000`,
    /// `dt_out = T/64`, 1 ns crossing tolerance, 10 ns zeno guard.
    pub fn for_network(net: &NetworkSpec, t_end: f64) -> Self {
        let period = net
            .oscillators()
            .iter()
            .map(|p| p.natural_period())
            .fold(f64::INFINITY, f64::min);
        Self::for_period(period, t_end)
    }

    pub fn for_period(period: f64, t_end: f64) -> Self {
        Self {
            t_end,
            dt: period / 2000.0,
            dt_out: period / 64.0,
            crossing_tol: 1.0e-9,
            zeno_guard: 10.0e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.t_end) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must be > 0",
                self.t_end
            )));
        }
        if !(pos(self.dt) && self.dt <= self.dt_out && pos(self.dt_out)) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < dt ({}) <= dt_out ({})",
                self.dt, self.dt_out
            )));
        }
        if !(pos(self.crossing_tol) && self.crossing_tol < self.dt) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < crossing_tol ({}) < dt ({})",
                self.crossing_tol, self.dt
            )));
        }
        if !(self.zeno_guard.is_finite() && self.zeno_guard >= 0.0) {
            return Err(Error::InvalidConfig("zeno_guard must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    /// Capacitor-node voltages.
    pub v: Vec<f64>,
    /// Comparator states, each `+1` or `-1`.
    pub s: Vec<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    /// Comparator `-1 → +1`; the node voltage is at its trough.
    Rise,
    /// Comparator `+1 → -1`; the node voltage is at its peak.
    Fall,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Rise => "rise",
            Direction::Fall => "fall",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwitchEvent {
    pub oscillator: usize,
    pub time: f64,
    pub direction: Direction,
}

/// Sampled output of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub times: Vec<f64>,
    /// `v_samples[i][k]` is oscillator `i` at `times[k]`.
    pub v_samples: Vec<Vec<f64>>,
    pub s_samples: Vec<Vec<i8>>,
    pub events: Vec<SwitchEvent>,
    pub noise_used: NoiseSpec,
    pub seed: u64,
    pub t_end: f64,
    pub dt_out: f64,
    pub final_state: State,
}

impl Trace {
    pub fn n(&self) -> usize {
        self.v_samples.len()
    }

    /// Trough (rise-event) times of one oscillator, strictly increasing.
    /// Empty when the oscillator never switched upward.
    pub fn troughs(&self, oscillator: usize) -> Vec<f64> {
        extract_troughs(self, oscillator)
    }
}

pub fn extract_troughs(trace: &Trace, oscillator: usize) -> Vec<f64> {
    trace
        .events
        .iter()
        .filter(|e| e.oscillator == oscillator && e.direction == Direction::Rise)
        .map(|e| e.time)
        .collect()
}

/// Random start inside the hysteresis band: `|v_i| < beta_i·v_a_i`, random
/// comparator state, deterministic in `seed`.
pub fn initial_state(net: &NetworkSpec, seed: u64) -> State {
    let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(seed, INIT_STREAM));
    let mut v = Vec::with_capacity(net.n());
    let mut s = Vec::with_capacity(net.n());
    for p in net.oscillators() {
        // 53-bit uniform in [0, 1), mapped to the open interval (-1, 1)
        let mut x = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        if x == 0.0 {
            x = 0.5;
        }
        v.push((2.0 * x - 1.0) * p.threshold());
        s.push(if rng.next_u64() & 1 == 0 { -1 } else { 1 });
    }
    State { t: 0.0, v, s }
}

/// Constant linear-algebraic data of a network, factorized once.
#[derive(Debug, Clone)]
pub struct Dynamics {
    n: usize,
    /// `M⁻¹·D`, row-major.
    rate: Vec<f64>,
    /// `M⁻¹`, row-major.
    m_inv: Vec<f64>,
    /// `M⁻¹·c_N`.
    common_jump: Vec<f64>,
    c_noise: Vec<f64>,
    amplitude: Vec<f64>,
    threshold: Vec<f64>,
    diagonal: bool,
}

impl Dynamics {
    pub fn new(net: &NetworkSpec) -> Self {
        let n = net.n();
        let m = net.capacitance_matrix().to_dmatrix();
        let m_inv = m
            .cholesky()
            .expect("capacitance matrix is positive definite")
            .inverse();
        let m_inv: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| m_inv[(i, j)])
            .collect();
        let osc = net.oscillators();
        let rate = (0..n * n).map(|k| m_inv[k] / osc[k % n].r_f).collect();
        let c_noise = net.c_noise().to_vec();
        let common_jump = (0..n)
            .map(|i| (0..n).map(|j| m_inv[i * n + j] * c_noise[j]).sum())
            .collect();
        Self {
            n,
            rate,
            m_inv,
            common_jump,
            c_noise,
            amplitude: osc.iter().map(|p| p.v_a).collect(),
            threshold: osc.iter().map(|p| p.threshold()).collect(),
            diagonal: net.edges().is_empty(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Node-voltage jump for a common source step `dvn`.
    pub fn common_noise_jump(&self, dvn: f64) -> Vec<f64> {
        self.common_jump.iter().map(|j| j * dvn).collect()
    }

    /// Node-voltage jump for per-oscillator source steps `dvn`.
    pub fn noise_jump(&self, dvn: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = self.c_noise.iter().zip(dvn).map(|(c, d)| c * d).collect();
        self.m_inv
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(&rhs).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn drive(&self, s: &[i8], u: &mut [f64]) {
        for ((u, &s), &a) in u.iter_mut().zip(s).zip(&self.amplitude) {
            *u = f64::from(s) * a;
        }
    }

    // out = -rate·w
    fn deriv(&self, w: &[f64], out: &mut [f64]) {
        if self.diagonal {
            for i in 0..self.n {
                out[i] = -self.rate[i * self.n + i] * w[i];
            }
            return;
        }
        for (o, row) in out.iter_mut().zip(self.rate.chunks_exact(self.n)) {
            *o = -row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// Stability polynomial of RK4 for `dw/dt = -rate·w`, step `h`.
    fn rk4_matrix(&self, h: f64) -> Vec<f64> {
        let n = self.n;
        let a: Vec<f64> = self.rate.iter().map(|r| -r * h).collect();
        let mul = |x: &[f64], y: &[f64]| -> Vec<f64> {
            let mut z = vec![0.0; n * n];
            for i in 0..n {
                for k in 0..n {
                    let xik = x[i * n + k];
                    if xik == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        z[i * n + j] += xik * y[k * n + j];
                    }
                }
            }
            z
        };
        let a2 = mul(&a, &a);
        let a3 = mul(&a2, &a);
        let a4 = mul(&a3, &a);
        let mut p = vec![0.0; n * n];
        for k in 0..n * n {
            p[k] = a[k] + a2[k] / 2.0 + a3[k] / 6.0 + a4[k] / 24.0;
        }
        for i in 0..n {
            p[i * n + i] += 1.0;
        }
        p
    }
}

struct Stepper<'a> {
    dyns: &'a Dynamics,
    u: Vec<f64>,
    w: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    regular_h: f64,
    regular: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(dyns: &'a Dynamics, regular_h: f64) -> Self {
        let n = dyns.n;
        Self {
            dyns,
            u: vec![0.0; n],
            w: vec![0.0; n],
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
            regular_h,
            regular: dyns.rk4_matrix(regular_h),
        }
    }

    /// One RK4 step of length `h` from `v`, written into `out`.
    fn step(&mut self, v: &[f64], h: f64, out: &mut [f64]) {
        let n = self.dyns.n;
        for i in 0..n {
            self.w[i] = v[i] - self.u[i];
        }
        if h == self.regular_h {
            if self.dyns.diagonal {
                for i in 0..n {
                    out[i] = self.u[i] + self.regular[i * n + i] * self.w[i];
                }
            } else {
                for (i, row) in self.regular.chunks_exact(n).enumerate() {
                    out[i] = self.u[i] + row.iter().zip(&self.w).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            return;
        }
        let [k1, k2, k3, k4] = &mut self.k;
        self.dyns.deriv(&self.w, k1);
        for i in 0..n {
            self.tmp[i] = self.w[i] + 0.5 * h * k1[i];
        }
        self.dyns.deriv(&self.tmp, k2);
        for i in 0..n {
            self.tmp[i] = self.w[i] + 0.5 * h * k2[i];
        }
        self.dyns.deriv(&self.tmp, k3);
        for i in 0..n {
            self.tmp[i] = self.w[i] + h * k3[i];
        }
        self.dyns.deriv(&self.tmp, k4);
        for i in 0..n {
            out[i] = self.u[i] + self.w[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

fn crossed(s: i8, v: f64, thr: f64) -> bool {
    (s > 0 && v >= thr) || (s < 0 && v <= -thr)
}

struct Recorder {
    times: Vec<f64>,
    v: Vec<Vec<f64>>,
    s: Vec<Vec<i8>>,
    dt_out: f64,
    count: usize,
    next: usize,
}

impl Recorder {
    fn next_time(&self) -> Option<f64> {
        (self.next < self.count).then_some(self.next as f64 * self.dt_out)
    }

    fn push(&mut self, t: f64, v: &[f64], s: &[i8]) {
        self.times.push(t);
        for (i, x) in v.iter().enumerate() {
            self.v[i].push(*x);
            self.s[i].push(s[i]);
        }
        self.next += 1;
    }
}

/// Simulates from a random initial state drawn from `seed`.
pub fn simulate(net: &NetworkSpec, noise: &NoiseSpec, cfg: &SimConfig, seed: u64) -> Result<Trace> {
    let init = initial_state(net, seed);
    simulate_from(net, noise, cfg, init, seed)
}

/// Simulates from an explicit initial state; `seed` is only echoed in the trace.
pub fn simulate_from(
    net: &NetworkSpec,
    noise: &NoiseSpec,
    cfg: &SimConfig,
    init: State,
    seed: u64,
) -> Result<Trace> {
    cfg.validate()?;
    noise.validate()?;
    let n = net.n();
    if init.v.len() != n || init.s.len() != n || init.s.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidConfig(
            "initial state does not match network".into(),
        ));
    }
    let dyns = Dynamics::new(net);

    let hold = noise.hold_interval;
    let segments = hold_count(cfg.t_end, hold);
    let steps_per_hold = libm::ceil(hold / cfg.dt).max(1.0) as usize;
    let h = hold / steps_per_hold as f64;

    let noisy = noise.rms_voltage > 0.0 && net.c_noise().iter().any(|&c| c > 0.0);
    let signals: Vec<NoiseSignal> = if !noisy {
        Vec::new()
    } else if net.noise_common() {
        vec![generate_noise(noise, cfg.t_end)?]
    } else {
        (0..n)
            .map(|i| {
                generate_noise(
                    &noise.with_seed(mix_seed(noise.seed, i as u64 + 1)),
                    cfg.t_end,
                )
            })
            .collect::<Result<_>>()?
    };

    let out_count = libm::floor(cfg.t_end / cfg.dt_out + 1e-9) as usize + 1;
    let mut rec = Recorder {
        times: Vec::with_capacity(out_count),
        v: vec![Vec::with_capacity(out_count); n],
        s: vec![Vec::with_capacity(out_count); n],
        dt_out: cfg.dt_out,
        count: out_count,
        next: 0,
    };

    let mut v = init.v;
    let mut s = init.s;
    let mut stepper = Stepper::new(&dyns, h);
    let mut events = Vec::new();
    let mut last_switch = vec![f64::NEG_INFINITY; n];
    let mut vb = vec![0.0; n];
    let mut probe = vec![0.0; n];

    let mut switch =
        |t: f64, v: &[f64], s: &mut [i8], events: &mut Vec<SwitchEvent>| -> Result<bool> {
            let mut any = false;
            for i in 0..n {
                if crossed(s[i], v[i], dyns.threshold[i]) {
                    if t - last_switch[i] < cfg.zeno_guard {
                        return Err(Error::Zeno {
                            oscillator: i,
                            time: t,
                            guard: cfg.zeno_guard,
                        });
                    }
                    last_switch[i] = t;
                    let direction = if s[i] > 0 {
                        Direction::Fall
                    } else {
                        Direction::Rise
                    };
                    s[i] = -s[i];
                    events.push(SwitchEvent {
                        oscillator: i,
                        time: t,
                        direction,
                    });
                    any = true;
                }
            }
            Ok(any)
        };

    // A start on or beyond a threshold switches immediately.
    switch(0.0, &v, &mut s, &mut events)?;
    dyns.drive(&s, &mut stepper.u);
    rec.push(0.0, &v, &s);

    for seg in 0..segments {
        let seg_start = seg as f64 * hold;
        let seg_end = if seg + 1 == segments {
            cfg.t_end
        } else {
            (seg + 1) as f64 * hold
        };
        if seg > 0 && !signals.is_empty() {
            let dv = if signals.len() == 1 {
                let x = &signals[0].samples;
                dyns.common_noise_jump(x[seg] - x[seg - 1])
            } else {
                let d: Vec<f64> = signals
                    .iter()
                    .map(|sig| sig.samples[seg] - sig.samples[seg - 1])
                    .collect();
                dyns.noise_jump(&d)
            };
            for (x, d) in v.iter_mut().zip(&dv) {
                *x += d;
            }
            if switch(seg_start, &v, &mut s, &mut events)? {
                dyns.drive(&s, &mut stepper.u);
            }
        }
        for k in 0..steps_per_hold {
            let mut ta = seg_start + k as f64 * h;
            if ta >= seg_end {
                break;
            }
            let tb = if k + 1 == steps_per_hold {
                seg_end
            } else {
                (seg_start + (k + 1) as f64 * h).min(seg_end)
            };
            loop {
                let span = tb - ta;
                stepper.step(&v, span, &mut vb);
                let hit = (0..n).any(|i| crossed(s[i], vb[i], dyns.threshold[i]));
                let t_next = if hit {
                    let (mut lo, mut hi) = (0.0, span);
                    while hi - lo > cfg.crossing_tol {
                        let mid = 0.5 * (lo + hi);
                        stepper.step(&v, mid, &mut probe);
                        if (0..n).any(|i| crossed(s[i], probe[i], dyns.threshold[i])) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    stepper.step(&v, hi, &mut vb);
                    ta + hi
                } else {
                    tb
                };
                while let Some(to) = rec.next_time() {
                    if to > t_next {
                        break;
                    }
                    if to == t_next {
                        rec.push(to, &vb, &s);
                    } else {
                        stepper.step(&v, to - ta, &mut probe);
                        rec.push(to, &probe, &s);
                    }
                }
                core::mem::swap(&mut v, &mut vb);
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite(t_next));
                }
                if !hit {
                    break;
                }
                switch(t_next, &v, &mut s, &mut events)?;
                dyns.drive(&s, &mut stepper.u);
                ta = t_next;
                if ta >= tb {
                    break;
                }
            }
        }
    }
    // Output instants that rounding pushed just past t_end.
    while rec.next_time().is_some() {
        let t = rec.next_time().unwrap();
        rec.push(t, &v, &s);
    }

    Ok(Trace {
        times: rec.times,
        v_samples: rec.v,
        s_samples: rec.s,
        events,
        noise_used: *noise,
        seed,
        t_end: cfg.t_end,
        dt_out: cfg.dt_out,
        final_state: State { t: cfg.t_end, v, s },
    })
}
