//! Resolved run parameters. Every field has a default, a JSON file may
//! override any subset, and command-line flags override the file.

use std::path::Path;

use noisesync_core::analysis::{DEFAULT_EPS_F, DEFAULT_EPS_PHI_DEG, DEFAULT_WINDOW_FRACTION};
use noisesync_core::model::{build_network, linear_detune};
use noisesync_core::noise::DEFAULT_HOLD;
use noisesync_core::{Graph, NetworkSpec, NoiseSpec, OscillatorParams, SimConfig};
use serde::{Deserialize, Serialize};

use crate::experiments::LockCriteria;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub oscillator: OscillatorParams,
    /// Coupling capacitance per graph edge (farads).
    pub c_c: f64,
    /// Noise-injection capacitance per oscillator (farads).
    pub c_noise: f64,
    pub noise_common: bool,
    /// Zero-order-hold interval of the noise source (seconds).
    pub hold_interval: f64,
    /// Fractional `r_f` spread across the oscillators, applied linearly.
    pub detune_spread: f64,
    pub t_end: f64,
    /// Integration step; `None` means natural period / 2000.
    pub dt: Option<f64>,
    /// Output interval; `None` means natural period / 64.
    pub dt_out: Option<f64>,
    pub crossing_tol: f64,
    pub zeno_guard: f64,
    pub window_fraction: f64,
    pub eps_f: f64,
    pub eps_phi_deg: f64,
    /// Lock-probability quorum for threshold and coupling searches.
    pub quorum: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            oscillator: OscillatorParams::default(),
            c_c: 5.0e-12,
            c_noise: 1.0e-12,
            noise_common: true,
            hold_interval: DEFAULT_HOLD,
            detune_spread: 0.02,
            t_end: 20.0e-3,
            dt: None,
            dt_out: None,
            crossing_tol: 1.0e-9,
            zeno_guard: 10.0e-9,
            window_fraction: DEFAULT_WINDOW_FRACTION,
            eps_f: DEFAULT_EPS_F,
            eps_phi_deg: DEFAULT_EPS_PHI_DEG,
            quorum: 0.8,
        }
    }
}

impl Params {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let p: Params = serde_json::from_str(text).map_err(|source| Error::Json {
            path: origin.to_string(),
            source,
        })?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(
            &crate::io::read_to_string(path)?,
            &path.display().to_string(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.oscillator.validate()?;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        let pos = |x: f64| x.is_finite() && x > 0.0;
        let checks = [
            ("c_c", pos(self.c_c)),
            ("c_noise", nonneg(self.c_noise)),
            ("hold_interval", pos(self.hold_interval)),
            (
                "detune_spread",
                self.detune_spread.is_finite() && self.detune_spread > -1.0,
            ),
            (
                "window_fraction",
                self.window_fraction > 0.0 && self.window_fraction <= 1.0,
            ),
            ("eps_f", pos(self.eps_f)),
            ("eps_phi_deg", pos(self.eps_phi_deg)),
            ("quorum", self.quorum > 0.0 && self.quorum <= 1.0),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(Error::Invalid(format!("parameter {name} out of range"))),
            None => Ok(()),
        }
    }

    pub fn criteria(&self) -> LockCriteria {
        LockCriteria {
            window_fraction: self.window_fraction,
            eps_f: self.eps_f,
            eps_phi_deg: self.eps_phi_deg,
        }
    }

    /// Simulation settings for `net`, scaled to its fastest oscillator unless
    /// `dt`/`dt_out` are pinned.
    pub fn sim_config(&self, net: &NetworkSpec) -> Result<SimConfig> {
        let mut cfg = SimConfig::for_network(net, self.t_end);
        cfg.dt = self.dt.unwrap_or(cfg.dt);
        cfg.dt_out = self.dt_out.unwrap_or(cfg.dt_out);
        cfg.crossing_tol = self.crossing_tol;
        cfg.zeno_guard = self.zeno_guard;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn noise(&self, rms: f64, seed: u64) -> NoiseSpec {
        NoiseSpec {
            rms_voltage: rms,
            hold_interval: self.hold_interval,
            seed,
        }
    }

    /// Default detune pattern for `n` oscillators.
    pub fn detune(&self, n: usize) -> Vec<f64> {
        linear_detune(n, self.detune_spread)
    }

    /// One oscillator per node and `c_c` per edge; `detune` defaults to
    /// [`Params::detune`].
    pub fn network(&self, g: &Graph, c_c: f64, detune: Option<&[f64]>) -> Result<NetworkSpec> {
        let default;
        let detune = match detune {
            Some(d) => d,
            None => {
                default = self.detune(g.n());
                &default
            }
        };
        Ok(build_network(
            g,
            &self.oscillator,
            c_c,
            self.c_noise,
            detune,
            self.noise_common,
        )?)
    }

    /// `n` uncoupled oscillators.
    pub fn uncoupled(&self, n: usize, detune: Option<&[f64]>) -> Result<NetworkSpec> {
        self.network(&Graph::new(n, Vec::new())?, self.c_c, detune)
    }
}
