//! Std companion to `noisesync-core`: spectra, the oscillator coloring
//! pipeline, parallel sweeps and threshold searches, file formats and the
//! `noisesync` command-line tool.

pub mod cli;
pub mod experiments;
pub mod io;
pub mod params;
pub mod pipeline;
pub mod spectrum;

pub use noisesync_core as core;

pub use params::Params;

/// Stream used to derive a noise seed from a run seed.
pub const NOISE_STREAM: u64 = 0x4E01;

/// Noise seed paired with simulation seed `seed`.
pub fn noise_seed(seed: u64) -> u64 {
    noisesync_core::mix_seed(seed, NOISE_STREAM)
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] noisesync_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Csv {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(_) => "simulation",
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
            Error::Csv { .. } => "csv",
            Error::Invalid(_) => "invalid",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
