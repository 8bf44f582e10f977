//! Simulation and analysis core for networks of capacitively coupled
//! Schmitt-trigger relaxation oscillators driven by injected white noise.
//!
//! Everything here is `no_std` with `alloc`: circuit model, seeded noise
//! generation, the hybrid event-driven integrator, trough-based lock and
//! phase analysis, and the phase-ordering graph-coloring algorithms. The
//! `noisesync` crate layers spectra, parallel experiments, file formats and
//! the command-line tool on top.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod coloring;
mod error;
pub mod graph;
pub mod model;
pub mod noise;
pub mod sim;

pub use crate::error::Error;
pub use crate::graph::Graph;
pub use crate::model::{CapacitanceMatrix, NetworkSpec, OscillatorParams};
pub use crate::noise::{NoiseSignal, NoiseSpec};
pub use crate::sim::{SimConfig, State, Trace};

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// SplitMix64 finalizer, used to derive independent sub-seeds from a master seed.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
