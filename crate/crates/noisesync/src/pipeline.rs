//! Graph coloring by simulating a topologically equivalent oscillator
//! network and reading color classes off the cyclic phase order.

use noisesync_core::coloring::{
    cyclic_greedy_coloring, phase_order, verify_coloring, Coloring, CyclicOrder,
};
use noisesync_core::sim::simulate;
use noisesync_core::{
    analysis::phase_report_window, mix_seed, Graph, NetworkSpec, NoiseSpec, SimConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::experiments::LockCriteria;
use crate::{noise_seed, Error, Result};

/// Per-run record: lock statistics, and the coloring size when locked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub locked: bool,
    pub num_colors: Option<usize>,
    pub max_rel_period_spread: Option<f64>,
    pub phase_std_deg: Option<f64>,
    pub phases_deg: Option<Vec<f64>>,
    /// Why the run produced no verdict (simulation abort, too few troughs).
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringResult {
    /// Best coloring over locked runs; `None` when no run locked.
    pub coloring: Option<Coloring>,
    pub locked: bool,
    pub runs_used: usize,
    pub locked_runs: usize,
    /// Run that produced `coloring`.
    pub best_run: Option<usize>,
    pub order: Option<CyclicOrder>,
    pub runs: Vec<RunRecord>,
}

impl ColoringResult {
    pub fn lock_rate(&self) -> f64 {
        self.locked_runs as f64 / self.runs_used as f64
    }

    pub fn num_colors(&self) -> Option<usize> {
        self.coloring.as_ref().map(|c| c.num_colors)
    }
}

/// Seed of run `run` under master seed `seed`.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    mix_seed(seed, run as u64)
}

/// Simulates `runs` independently seeded copies of `net` (which must have
/// one oscillator per node of `g`) and keeps the coloring with the fewest
/// colors among locked runs; ties go to the earliest run.
pub fn color_via_oscillators(
    g: &Graph,
    net: &NetworkSpec,
    noise: &NoiseSpec,
    cfg: &SimConfig,
    criteria: &LockCriteria,
    runs: usize,
    seed: u64,
) -> Result<ColoringResult> {
    if runs == 0 {
        return Err(Error::Invalid("runs must be at least 1".into()));
    }
    if net.n() != g.n() {
        return Err(Error::Invalid(format!(
            "network has {} oscillators for {} graph nodes",
            net.n(),
            g.n()
        )));
    }
    let results: Vec<(RunRecord, Option<(Coloring, CyclicOrder)>)> = (0..runs)
        .into_par_iter()
        .map(|run| one_run(g, net, noise, cfg, criteria, run, run_seed(seed, run)))
        .collect::<Result<_>>()?;

    let mut best: Option<(usize, Coloring, CyclicOrder)> = None;
    for (rec, col) in &results {
        if let Some((c, o)) = col {
            if best
                .as_ref()
                .is_none_or(|(_, b, _)| c.num_colors < b.num_colors)
            {
                best = Some((rec.run, c.clone(), o.clone()));
            }
        }
    }
    let locked_runs = results.iter().filter(|(r, _)| r.locked).count();
    let (best_run, coloring, order) = match best {
        Some((r, c, o)) => (Some(r), Some(c), Some(o)),
        None => (None, None, None),
    };
    Ok(ColoringResult {
        locked: coloring.is_some(),
        coloring,
        runs_used: runs,
        locked_runs,
        best_run,
        order,
        runs: results.into_iter().map(|(r, _)| r).collect(),
    })
}

fn one_run(
    g: &Graph,
    net: &NetworkSpec,
    noise: &NoiseSpec,
    cfg: &SimConfig,
    criteria: &LockCriteria,
    run: usize,
    seed: u64,
) -> Result<(RunRecord, Option<(Coloring, CyclicOrder)>)> {
    let mut rec = RunRecord {
        run,
        seed,
        locked: false,
        num_colors: None,
        max_rel_period_spread: None,
        phase_std_deg: None,
        phases_deg: None,
        error: None,
    };
    let trace = match simulate(net, &noise.with_seed(noise_seed(seed)), cfg, seed) {
        Ok(t) => t,
        Err(e) => {
            rec.error = Some(e.to_string());
            return Ok((rec, None));
        }
    };
    let lock = match criteria.evaluate(&trace) {
        Ok(l) => l,
        Err(e) => {
            rec.error = Some(e.to_string());
            return Ok((rec, None));
        }
    };
    rec.locked = lock.locked;
    rec.max_rel_period_spread = Some(lock.max_rel_period_spread);
    rec.phase_std_deg = Some(lock.phase_std_deg);
    if !lock.locked {
        return Ok((rec, None));
    }
    let phases = phase_report_window(&trace, 0, criteria.window_fraction)?;
    let order = phase_order(&phases);
    let coloring = cyclic_greedy_coloring(&order, g);
    if !verify_coloring(g, &coloring)?.valid {
        return Err(Error::Invalid(format!(
            "run {run} produced an improper coloring"
        )));
    }
    rec.num_colors = Some(coloring.num_colors);
    rec.phases_deg = Some(phases.phases_deg);
    Ok((rec, Some((coloring, order))))
}
