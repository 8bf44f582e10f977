//! Argument definitions and command implementations for the `noisesync`
//! binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisesync_core::analysis::{peak_fwhm, WindowKind};
use noisesync_core::graph::{circulant_graph, parse_dimacs, serialize_dimacs};
use noisesync_core::sim::simulate;
use noisesync_core::Graph;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::experiments::{
    find_critical_coupling, find_noise_threshold, sweep_amplitude, sweep_population, Experiment,
    PointFlag, SearchStatus, ThresholdSearch,
};
use crate::io::{self, to_json, write_string};
use crate::pipeline::color_via_oscillators;
use crate::spectrum::periodogram_samples;
use crate::{noise_seed, Error, Params, Result};

#[derive(Debug, Parser)]
#[command(
    name = "noisesync",
    version,
    about = "Noise-assisted synchronization of relaxation-oscillator networks"
)]
pub struct Cli {
    /// JSON file overriding default parameters; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a graph in DIMACS format.
    Gen(GenArgs),
    /// Simulate the oscillator network of a graph.
    Sim(SimArgs),
    /// Periodogram of one channel of a trace CSV.
    Spectrum(SpectrumArgs),
    /// Color a graph with the oscillator pipeline.
    Color(ColorArgs),
    /// Search the noise rms needed to lock a network.
    Threshold(ThresholdArgs),
    /// Run a threshold or coupling sweep described by a JSON file.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Named {
    Triangle,
    C4,
    K4,
    Diamond,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// Circulant ring: N nodes, each joined to its K nearest neighbours.
    #[arg(long, num_args = 2, value_names = ["N", "K"], conflicts_with_all = ["complete", "cycle", "named"])]
    pub circulant: Option<Vec<usize>>,
    #[arg(long, value_name = "N")]
    pub complete: Option<usize>,
    #[arg(long, value_name = "N")]
    pub cycle: Option<usize>,
    #[arg(long, value_enum)]
    pub named: Option<Named>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Coupling capacitance per edge (farads).
    #[arg(long)]
    pub cc: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub noise_rms: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Comma-separated fractional r_f offsets, one per node.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub detune: Option<Vec<f64>>,
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowArg {
    Hann,
    Rect,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// 1-based oscillator index (column v<I>).
    #[arg(long, default_value_t = 1)]
    pub osc: usize,
    #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
    pub window: WindowArg,
    #[arg(long, default_value_t = 4)]
    pub pad: usize,
    /// Ignore samples before this time (seconds).
    #[arg(long, default_value_t = 0.0)]
    pub t_start: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the peak frequency and FWHM as JSON.
    #[arg(long)]
    pub peak: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ColorArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub cc: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub noise_rms: f64,
    #[arg(long, default_value_t = 12)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub detune: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("network").required(true).args(["graph", "n"])))]
pub struct ThresholdArgs {
    /// Coupled network from a DIMACS graph.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Uncoupled network of N oscillators.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub cc: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub detune: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub v_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v_max: f64,
    #[arg(long, default_value_t = 5.0e-3)]
    pub resolution: f64,
    /// Number of seeds, starting at --seed.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub quorum: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write probe points as `x,value,flag` CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Amplitude,
    Population,
    Coupling,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Contents of a `sweep --spec` file. Unused fields are ignored per kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub amplitudes: Vec<f64>,
    pub sizes: Vec<usize>,
    /// DIMACS file, relative to the spec file.
    pub graph: Option<PathBuf>,
    pub named: Option<Named>,
    pub noise_rms: Vec<f64>,
    pub c_lo: f64,
    pub c_hi: f64,
    pub ratio_resolution: f64,
    pub v_lo: f64,
    pub v_hi: f64,
    pub resolution: f64,
    pub seeds: u64,
    pub seed: u64,
    pub quorum: Option<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            amplitudes: vec![1.5, 2.0, 2.5, 3.0],
            sizes: vec![2, 3, 4],
            graph: None,
            named: None,
            noise_rms: vec![0.0],
            c_lo: 0.1e-12,
            c_hi: 100e-12,
            ratio_resolution: 0.05,
            v_lo: 0.0,
            v_hi: 1.0,
            resolution: 5e-3,
            seeds: 10,
            seed: 0,
            quorum: None,
        }
    }
}

pub fn named_graph(n: Named) -> Graph {
    match n {
        Named::Triangle => Graph::complete(3),
        Named::C4 => Graph::cycle(4).expect("4-cycle"),
        Named::K4 => Graph::complete(4),
        Named::Diamond => Graph::diamond(),
    }
}

fn seed_list(seed: u64, count: u64) -> Vec<u64> {
    (0..count).map(|i| seed.wrapping_add(i)).collect()
}

fn load_graph(path: &Path) -> Result<Graph> {
    Ok(parse_dimacs(&io::read_to_string(path)?)?)
}

fn base_params(cli: &Cli) -> Result<Params> {
    match &cli.params {
        Some(p) => Params::load(p),
        None => Ok(Params::default()),
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut params = base_params(cli)?;
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Sim(a) => {
            if let Some(t) = a.t_end {
                params.t_end = t;
            }
            if let Some(c) = a.cc {
                params.c_c = c;
            }
            params.validate()?;
            sim(a, &params)
        }
        Command::Spectrum(a) => spectrum(a, &params),
        Command::Color(a) => {
            if let Some(c) = a.cc {
                params.c_c = c;
            }
            params.validate()?;
            color(a, &params)
        }
        Command::Threshold(a) => {
            if let Some(c) = a.cc {
                params.c_c = c;
            }
            if let Some(q) = a.quorum {
                params.quorum = q;
            }
            params.validate()?;
            threshold(a, &params)
        }
        Command::Sweep(a) => sweep(a, params),
    }
}

fn gen(a: &GenArgs) -> Result<()> {
    let g = match (&a.circulant, a.complete, a.cycle, a.named) {
        (Some(nk), None, None, None) => circulant_graph(nk[0], nk[1])?,
        (None, Some(n), None, None) => Graph::complete(n),
        (None, None, Some(n), None) => Graph::cycle(n)?,
        (None, None, None, Some(named)) => named_graph(named),
        _ => {
            return Err(Error::Invalid(
                "exactly one of --circulant, --complete, --cycle, --named is required".into(),
            ))
        }
    };
    write_string(&a.out, &serialize_dimacs(&g))
}

fn sim(a: &SimArgs, params: &Params) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let net = params.network(&g, params.c_c, a.detune.as_deref())?;
    let exp = Experiment::new(params, net)?;
    let noise = params.noise(a.noise_rms, noise_seed(a.seed));
    let trace = simulate(&exp.net, &noise, &exp.cfg, a.seed)?;
    write_string(&a.trace, &io::trace_csv(&trace))?;
    if let Some(p) = &a.events {
        write_string(p, &io::events_csv(&trace))?;
    }
    let lock = exp.criteria.evaluate(&trace);
    let phase = match &lock {
        Ok(l) if l.locked => {
            noisesync_core::analysis::phase_report_window(&trace, 0, params.window_fraction).ok()
        }
        _ => None,
    };
    let troughs: Vec<usize> = (0..trace.n()).map(|i| trace.troughs(i).len()).collect();
    let report = json!({
        "command": "sim",
        "params": params,
        "args": a,
        "sim_config": exp.cfg,
        "noise": noise,
        "network": exp.net,
        "troughs": troughs,
        "events": trace.events.len(),
        "lock": lock.as_ref().ok(),
        "lock_error": lock.as_ref().err().map(|e| e.to_string()),
        "phase": phase,
    });
    write_string(&a.report, &to_json(&report))
}

fn spectrum(a: &SpectrumArgs, params: &Params) -> Result<()> {
    let table = io::parse_trace_csv(
        &io::read_to_string(&a.trace)?,
        &a.trace.display().to_string(),
    )?;
    if a.osc == 0 || a.osc > table.v.len() {
        return Err(Error::Invalid(format!(
            "--osc {} out of range 1..={}",
            a.osc,
            table.v.len()
        )));
    }
    let dt = table
        .dt()
        .ok_or_else(|| Error::Invalid("trace has fewer than 2 samples".into()))?;
    let first = table.times.partition_point(|&t| t < a.t_start);
    let kind = match a.window {
        WindowArg::Hann => WindowKind::Hann,
        WindowArg::Rect => WindowKind::Rectangular,
    };
    let spec = periodogram_samples(&table.v[a.osc - 1][first..], dt, kind, a.pad)?;
    write_string(&a.out, &io::spectrum_csv(&spec))?;
    if let Some(p) = &a.peak {
        let peak = peak_fwhm(&spec);
        let report = json!({
            "command": "spectrum",
            "params": params,
            "args": a,
            "window_length": spec.window_length,
            "window_kind": kind.label(),
            "peak": peak.as_ref().ok(),
            "peak_error": peak.as_ref().err().map(|e| e.to_string()),
        });
        write_string(p, &to_json(&report))?;
    }
    Ok(())
}

fn color(a: &ColorArgs, params: &Params) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let net = params.network(&g, params.c_c, a.detune.as_deref())?;
    let exp = Experiment::new(params, net)?;
    let noise = params.noise(a.noise_rms, 0);
    let r = color_via_oscillators(
        &g,
        &exp.net,
        &noise,
        &exp.cfg,
        &exp.criteria,
        a.runs,
        a.seed,
    )?;
    let report = json!({
        "command": "color",
        "num_colors": r.num_colors(),
        "assignment": r.coloring.as_ref().map(|c| &c.assignment),
        "locked_runs": r.locked_runs,
        "total_runs": r.runs_used,
        "order": r.order.as_ref().map(|o| o.sequence.iter().map(|i| i + 1).collect::<Vec<_>>()),
        "locked": r.locked,
        "lock_rate": r.lock_rate(),
        "best_run": r.best_run,
        "phases_deg": r.order.as_ref().map(|o| &o.phases_deg),
        "runs": r.runs,
        "params": params,
        "args": a,
        "sim_config": exp.cfg,
    });
    write_string(&a.out, &to_json(&report))
}

fn threshold(a: &ThresholdArgs, params: &Params) -> Result<()> {
    let net = match (&a.graph, a.n) {
        (Some(path), _) => params.network(&load_graph(path)?, params.c_c, a.detune.as_deref())?,
        (None, Some(n)) => params.uncoupled(n, a.detune.as_deref())?,
        (None, None) => unreachable!("clap enforces the group"),
    };
    let exp = Experiment::new(params, net)?;
    let seeds = seed_list(a.seed, a.seeds);
    let r = find_noise_threshold(&exp, a.v_min, a.v_max, a.resolution, &seeds, params.quorum)?;
    if let Some(p) = &a.csv {
        let rows: Vec<(f64, Option<f64>, &str)> = r
            .probes
            .iter()
            .map(|p| {
                let flag = if p.lock_probability >= params.quorum {
                    "locked"
                } else {
                    "unlocked"
                };
                (p.v_rms, Some(p.lock_probability), flag)
            })
            .collect();
        write_string(p, &io::xy_csv(&rows))?;
    }
    let report = json!({
        "command": "threshold",
        "result": r,
        "params": params,
        "args": a,
        "sim_config": exp.cfg,
        "network": exp.net,
    });
    write_string(&a.out, &to_json(&report))
}

fn sweep(a: &SweepArgs, mut params: Params) -> Result<()> {
    let text = io::read_to_string(&a.spec)?;
    let spec: SweepSpec = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: a.spec.display().to_string(),
        source,
    })?;
    if let Some(q) = spec.quorum {
        params.quorum = q;
    }
    params.validate()?;
    let seeds = seed_list(spec.seed, spec.seeds);
    let search = ThresholdSearch {
        v_lo: spec.v_lo,
        v_hi: spec.v_hi,
        resolution: spec.resolution,
        seeds: seeds.clone(),
        quorum: params.quorum,
    };
    let (result, rows): (serde_json::Value, Vec<(f64, Option<f64>, &str)>) = match a.kind {
        SweepKind::Amplitude => {
            let r = sweep_amplitude(&params, &spec.amplitudes, &search)?;
            let rows = r.rows();
            (serde_json::to_value(&r).unwrap(), rows)
        }
        SweepKind::Population => {
            let r = sweep_population(&params, &spec.sizes, &search)?;
            let rows = r.rows();
            (serde_json::to_value(&r).unwrap(), rows)
        }
        SweepKind::Coupling => {
            let g = match (&spec.graph, spec.named) {
                (Some(p), None) => {
                    let base = a.spec.parent().unwrap_or(Path::new("."));
                    load_graph(&base.join(p))?
                }
                (None, Some(n)) => named_graph(n),
                _ => {
                    return Err(Error::Invalid(
                        "coupling sweep needs exactly one of graph, named".into(),
                    ))
                }
            };
            let results = spec
                .noise_rms
                .iter()
                .map(|&rms| {
                    find_critical_coupling(
                        &params,
                        &g,
                        rms,
                        spec.c_lo,
                        spec.c_hi,
                        spec.ratio_resolution,
                        &seeds,
                        params.quorum,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = results
                .iter()
                .map(|r| {
                    let flag = match r.status {
                        SearchStatus::Found => PointFlag::Ok,
                        SearchStatus::BelowRange => PointFlag::BelowRange,
                        SearchStatus::NoneFound => PointFlag::Censored,
                    };
                    (
                        r.v_rms,
                        r.c_star.filter(|_| r.status != SearchStatus::NoneFound),
                        flag.label(),
                    )
                })
                .collect();
            (
                json!({ "graph": serialize_dimacs(&g), "points": results }),
                rows,
            )
        }
    };
    if let Some(p) = &a.csv {
        write_string(p, &io::xy_csv(&rows))?;
    }
    let report = json!({
        "command": "sweep",
        "kind": a.kind,
        "result": result,
        "params": params,
        "spec": spec,
        "args": a,
    });
    write_string(&a.out, &to_json(&report))
}
