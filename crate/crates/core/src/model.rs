//! Circuit-level description of an oscillator network.
//!
//! Each oscillator is an ideal Schmitt trigger with output `±v_a` feeding
//! its own capacitor `c_l` through `r_f`. Coupling capacitors and the
//! noise-injection capacitor all attach at the capacitor node, so the node
//! voltages obey `M·dv/dt = D·(u − v)` with a constant capacitance matrix `M`.

use alloc::format;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::{Error, Result};

/// Circuit constants of one Schmitt-trigger relaxation oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct OscillatorParams {
    /// Feedback resistance (ohms).
    pub r_f: f64,
    /// Timing capacitance (farads).
    pub c_l: f64,
    /// Hysteresis ratio; the comparator flips at `±beta·v_a`.
    pub beta: f64,
    /// Output amplitude (volts).
    pub v_a: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self {
            r_f: 1.0e6,
            c_l: 100.0e-12,
            beta: 0.5,
            v_a: 2.0,
        }
    }
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.r_f) {
            return Err(Error::InvalidParams(format!(
                "r_f = {} must be > 0",
                self.r_f
            )));
        }
        if !ok(self.c_l) {
            return Err(Error::InvalidParams(format!(
                "c_l = {} must be > 0",
                self.c_l
            )));
        }
        if !ok(self.v_a) {
            return Err(Error::InvalidParams(format!(
                "v_a = {} must be > 0",
                self.v_a
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "beta = {} must lie in (0, 1)",
                self.beta
            )));
        }
        Ok(())
    }

    /// Switching threshold magnitude `beta·v_a`.
    pub fn threshold(&self) -> f64 {
        self.beta * self.v_a
    }

    /// Free-running period `2·r_f·c_l·ln((1+β)/(1−β))`.
    pub fn natural_period(&self) -> f64 {
        natural_period(self)
    }
}

/// Free-running period of an isolated oscillator.
pub fn natural_period(p: &OscillatorParams) -> f64 {
    2.0 * p.r_f * p.c_l * libm::log((1.0 + p.beta) / (1.0 - p.beta))
}

/// A coupling capacitor between two oscillators (0-based, `a < b`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coupling {
    pub a: usize,
    pub b: usize,
    pub c_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetworkSpec {
    oscillators: Vec<OscillatorParams>,
    edges: Vec<Coupling>,
    c_noise: Vec<f64>,
    noise_common: bool,
}

impl NetworkSpec {
    /// Validates and assembles a network. Edges are normalized to `a < b`
    /// and sorted; duplicates and self-loops are rejected.
    pub fn new(
        oscillators: Vec<OscillatorParams>,
        edges: Vec<Coupling>,
        c_noise: Vec<f64>,
        noise_common: bool,
    ) -> Result<Self> {
        let n = oscillators.len();
        if n == 0 {
            return Err(Error::InvalidNetwork(
                "network needs at least one oscillator".into(),
            ));
        }
        for p in &oscillators {
            p.validate()?;
        }
        if c_noise.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "{} noise capacitances for {} oscillators",
                c_noise.len(),
                n
            )));
        }
        if let Some(c) = c_noise.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidNetwork(format!("c_noise = {c} must be >= 0")));
        }
        let mut norm = Vec::with_capacity(edges.len());
        for e in edges {
            if e.a == e.b {
                return Err(Error::InvalidNetwork(format!(
                    "self-loop on oscillator {}",
                    e.a
                )));
            }
            if e.a >= n || e.b >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({}, {}) out of range for {} oscillators",
                    e.a, e.b, n
                )));
            }
            if !(e.c_c.is_finite() && e.c_c > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "c_c = {} must be > 0",
                    e.c_c
                )));
            }
            norm.push(Coupling {
                a: e.a.min(e.b),
                b: e.a.max(e.b),
                c_c: e.c_c,
            });
        }
        norm.sort_by_key(|x| (x.a, x.b));
        if let Some(w) = norm
            .windows(2)
            .find(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b))
        {
            return Err(Error::InvalidNetwork(format!(
                "duplicate edge ({}, {})",
                w[0].a, w[0].b
            )));
        }
        Ok(Self {
            oscillators,
            edges: norm,
            c_noise,
            noise_common,
        })
    }

    pub fn n(&self) -> usize {
        self.oscillators.len()
    }

    pub fn oscillators(&self) -> &[OscillatorParams] {
        &self.oscillators
    }

    pub fn edges(&self) -> &[Coupling] {
        &self.edges
    }

    pub fn c_noise(&self) -> &[f64] {
        &self.c_noise
    }

    pub fn noise_common(&self) -> bool {
        self.noise_common
    }

    pub fn capacitance_matrix(&self) -> CapacitanceMatrix {
        capacitance_matrix(self)
    }
}

/// Builds a network topologically equivalent to `graph`: one oscillator per
/// node, one coupling capacitor `c_c` per edge. Oscillator `i` gets
/// `r_f = defaults.r_f·(1 + detune[i])`.
pub fn build_network(
    graph: &Graph,
    defaults: &OscillatorParams,
    c_c: f64,
    c_noise: f64,
    detune: &[f64],
    noise_common: bool,
) -> Result<NetworkSpec> {
    let n = graph.n();
    if detune.len() != n {
        return Err(Error::InvalidNetwork(format!(
            "detune has {} entries for {} nodes",
            detune.len(),
            n
        )));
    }
    let oscillators = detune
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let scale = 1.0 + d;
            if !(scale > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "detune[{i}] = {d} gives non-positive r_f"
                )));
            }
            Ok(OscillatorParams {
                r_f: defaults.r_f * scale,
                ..*defaults
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = graph
        .edges()
        .iter()
        .map(|&(a, b)| Coupling { a, b, c_c })
        .collect();
    NetworkSpec::new(oscillators, edges, alloc::vec![c_noise; n], noise_common)
}

/// Evenly spaced fractional `r_f` offsets from 0 to `spread` (a single
/// oscillator gets 0). With `spread = 0.02` and two oscillators this is the
/// default `(0, +0.02)` mismatch.
pub fn linear_detune(n: usize, spread: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => (0..n).map(|i| spread * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Symmetric nodal capacitance matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CapacitanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_strictly_diagonally_dominant(&self) -> bool {
        (0..self.n).all(|i| {
            let off: f64 = (0..self.n)
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            self.get(i, i) > off
        })
    }

    /// `M·x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `M[i][i] = c_l(i) + c_noise(i) + Σ c_c(i,·)`, `M[i][j] = −c_c(i,j)`.
pub fn capacitance_matrix(net: &NetworkSpec) -> CapacitanceMatrix {
    let n = net.n();
    let mut data = alloc::vec![0.0; n * n];
    for (i, p) in net.oscillators.iter().enumerate() {
        data[i * n + i] = p.c_l + net.c_noise[i];
    }
    for e in &net.edges {
        data[e.a * n + e.a] += e.c_c;
        data[e.b * n + e.b] += e.c_c;
        data[e.a * n + e.b] -= e.c_c;
        data[e.b * n + e.a] -= e.c_c;
    }
    CapacitanceMatrix { n, data }
}
