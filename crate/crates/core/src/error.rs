use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid oscillator parameter: {0}")]
    InvalidParams(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("zeno violation: oscillator {oscillator} switched twice within {guard:e} s (t = {time:e} s)")]
    Zeno {
        oscillator: usize,
        time: f64,
        guard: f64,
    },
    #[error("non-finite state at t = {0:e} s")]
    NonFinite(f64),
    #[error("oscillator {oscillator} has {found} troughs in the analysis window, need {needed}")]
    InsufficientTroughs {
        oscillator: usize,
        found: usize,
        needed: usize,
    },
    #[error("too few samples: {found} (need {needed})")]
    TooShort { found: usize, needed: usize },
    #[error("spectral peak lies on the grid boundary")]
    PeakAtBoundary,
    #[error("DIMACS line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph has {n} nodes, brute-force limit is {limit}")]
    GraphTooLarge { n: usize, limit: usize },
    #[error("coloring does not cover node {0}")]
    IncompleteColoring(usize),
}
