//! Parameter sweeps: every point of the Cartesian product runs independently
//! in a worker pool; rows are collected in point order and written once.

use std::path::PathBuf;

use rayon::prelude::*;

use jjreadout_core::coeffode::{self, uniform_grid};
use jjreadout_core::observables::{bloch_length, bloch_series};
use jjreadout_core::params::build_system;
use jjreadout_core::Mode;

use crate::config::{RunConfig, SweepAxis, TimeValue};
use crate::output::{num, Stamp, Table};
use crate::CliError;

/// One point of the product grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub bias_ratio: Option<f64>,
    pub e_j: f64,
    pub duration: TimeValue,
}

/// Observables at one point and mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepResult {
    pub t0: f64,
    /// First time with Bloch length below 1/2 on the configured grid; NaN if never.
    pub half_time: f64,
    pub bloch_at_duration: f64,
    pub duration: f64,
}

pub fn points(cfg: &RunConfig) -> Result<Vec<SweepPoint>, CliError> {
    let total = cfg.sweep.iter().map(SweepAxis::len).try_fold(1usize, |acc, n| acc.checked_mul(n));
    match total {
        Some(n) if n <= cfg.sweep_cap => {}
        _ => {
            return Err(CliError::Config(format!(
                "sweep has {} points, above sweep_cap = {}",
                total.map_or("too many".to_string(), |n| n.to_string()),
                cfg.sweep_cap
            )))
        }
    }
    let mut out = vec![SweepPoint {
        index: 0,
        bias_ratio: cfg.inputs.bias_ratio,
        e_j: cfg.inputs.e_j,
        duration: cfg.duration,
    }];
    for axis in &cfg.sweep {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for base in &out {
            match axis {
                SweepAxis::BiasRatio(v) => next.extend(v.iter().map(|&x| SweepPoint { bias_ratio: Some(x), ..*base })),
                SweepAxis::QubitCoupling(v) => next.extend(v.iter().map(|&x| SweepPoint { e_j: x, ..*base })),
                SweepAxis::Duration(v) => next.extend(v.iter().map(|&x| SweepPoint { duration: x, ..*base })),
            }
        }
        out = next;
    }
    for (i, pt) in out.iter_mut().enumerate() {
        pt.index = i;
    }
    Ok(out)
}

fn evaluate(cfg: &RunConfig, pt: &SweepPoint, mode: Mode) -> Result<SweepResult, CliError> {
    let mut inputs = cfg.inputs;
    inputs.e_j = pt.e_j;
    if pt.bias_ratio != cfg.inputs.bias_ratio {
        inputs.bias_ratio = pt.bias_ratio;
        inputs.bias_current = None;
    }
    let p = build_system(&inputs)?;
    let t_max = cfg.t_max.seconds(p.t0);
    let duration = pt.duration.seconds(p.t0);
    if !t_max.is_finite() || !duration.is_finite() {
        return Err(CliError::Config(format!("point {}: times in T0 units need a coupled qubit", pt.index)));
    }
    let grid = uniform_grid(t_max, cfg.samples - 1);
    let states = coeffode::integrate(&p, mode, &grid, &cfg.tol)?;
    let series = bloch_series(&grid, &states)?;
    let half_time = grid
        .windows(2)
        .zip(series.lengths.windows(2))
        .find_map(|(t, b)| (b[0] >= 0.5 && b[1] < 0.5).then(|| t[0] + (t[1] - t[0]) * (b[0] - 0.5) / (b[0] - b[1])))
        .unwrap_or(f64::NAN);
    let at = if duration == 0.0 { vec![0.0] } else { vec![0.0, duration] };
    let end = coeffode::integrate(&p, mode, &at, &cfg.tol)?;
    Ok(SweepResult { t0: p.t0, half_time, bloch_at_duration: bloch_length(end.last().expect("non-empty")), duration })
}

pub fn run(cfg: &RunConfig, stamp: Stamp, jobs: usize) -> Result<Vec<PathBuf>, CliError> {
    let pts = points(cfg)?;
    let tasks: Vec<(SweepPoint, Mode)> = pts.iter().flat_map(|pt| cfg.modes.iter().map(move |&m| (*pt, m))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<SweepResult> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(pt, mode)| {
                evaluate(cfg, pt, *mode).map_err(|e| e.context(&format!("sweep point {} ({mode})", pt.index)))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let header = ["point", "mode", "bias_ratio", "e_j", "duration_ns", "duration_over_T0", "observable", "value"];
    let mut table = Table::new(cfg, None, stamp, &header);
    for ((pt, mode), r) in tasks.iter().zip(&results) {
        let common = [
            pt.index.to_string(),
            mode.to_string(),
            pt.bias_ratio.map_or("nan".to_string(), num),
            num(pt.e_j),
            num(r.duration * 1e9),
            num(r.duration / r.t0),
        ];
        for (name, value) in [
            ("half_time_ns", r.half_time * 1e9),
            ("half_time_over_T0", r.half_time / r.t0),
            ("bloch_at_duration", r.bloch_at_duration),
        ] {
            let mut row: Vec<String> = common.to_vec();
            row.push(name.to_string());
            row.push(num(value));
            table.row(&row);
        }
    }
    Ok(vec![table.write(&cfg.output_dir, "sweep", cfg)?])
}
