//! Single-run subcommands: bloch, wigner, coeffs, dephasing.

use std::path::PathBuf;

use jjreadout_core::coeffode::{self, uniform_grid};
use jjreadout_core::dephasing::noise_budget;
use jjreadout_core::observables::{assemble_ws_from, bloch_series};
use jjreadout_core::params::build_system;
use jjreadout_core::SystemParams;

use crate::config::RunConfig;
use crate::output::{num, Stamp, Table};
use crate::CliError;

pub fn system(cfg: &RunConfig) -> Result<SystemParams, CliError> {
    build_system(&cfg.inputs).map_err(CliError::from)
}

fn time_grid(cfg: &RunConfig, p: &SystemParams) -> Result<Vec<f64>, CliError> {
    let t_max = cfg.t_max.seconds(p.t0);
    if !t_max.is_finite() {
        return Err(CliError::Config("t_max in units of T0 needs a coupled qubit (T0 is infinite)".into()));
    }
    Ok(uniform_grid(t_max, cfg.samples - 1))
}

fn t_columns(t: f64, p: &SystemParams) -> [f64; 2] {
    [t * 1e9, t / p.t0]
}

/// `t_ns, t_over_T0, bloch, sx, sy` for every requested mode.
pub fn bloch(cfg: &RunConfig, stamp: Stamp) -> Result<Vec<PathBuf>, CliError> {
    let p = system(cfg)?;
    let grid = time_grid(cfg, &p)?;
    let mut written = Vec::new();
    for &mode in &cfg.modes {
        let states = coeffode::integrate(&p, mode, &grid, &cfg.tol)?;
        let series = bloch_series(&grid, &states)?;
        let mut table = Table::new(cfg, Some(&p), stamp, &["t_ns", "t_over_T0", "bloch", "sx", "sy"]);
        for i in 0..grid.len() {
            let [ns, rel] = t_columns(grid[i], &p);
            table.nums(&[ns, rel, series.lengths[i], series.sx[i], series.sy[i]]);
        }
        written.push(table.write(&cfg.output_dir, &format!("bloch_{mode}"), cfg)?);
    }
    Ok(written)
}

/// Long-form surface `t_ns, t_over_T0, gamma, n, ws` at the snapshot time.
pub fn wigner(cfg: &RunConfig, stamp: Stamp) -> Result<Vec<PathBuf>, CliError> {
    let p = system(cfg)?;
    let t = cfg.time.seconds(p.t0);
    if !t.is_finite() {
        return Err(CliError::Config("time in units of T0 needs a coupled qubit (T0 is infinite)".into()));
    }
    let grid = if t == 0.0 { vec![0.0] } else { vec![0.0, t] };
    let mut written = Vec::new();
    for &mode in &cfg.modes {
        let states = coeffode::integrate(&p, mode, &grid, &cfg.tol)?;
        let surface = assemble_ws_from(&p, mode, t, states.last().expect("non-empty grid"), &cfg.grid)?;
        let mut table = Table::new(cfg, Some(&p), stamp, &["t_ns", "t_over_T0", "gamma", "n", "ws"]);
        let [ns, rel] = t_columns(t, &p);
        for (i, &g) in surface.gamma_axis.iter().enumerate() {
            for (j, &n) in surface.n_axis.iter().enumerate() {
                table.nums(&[ns, rel, g, n, surface.at(i, j)]);
            }
        }
        written.push(table.write(&cfg.output_dir, &format!("wigner_{mode}"), cfg)?);
    }
    Ok(written)
}

/// Real and imaginary parts of the six off-diagonal coefficients over the time grid.
pub fn coeffs(cfg: &RunConfig, stamp: Stamp) -> Result<Vec<PathBuf>, CliError> {
    let p = system(cfg)?;
    let grid = time_grid(cfg, &p)?;
    let header = [
        "t_ns", "t_over_T0", "re_a", "im_a", "re_b", "im_b", "re_c", "im_c", "re_d", "im_d", "re_e", "im_e", "re_f", "im_f",
    ];
    let mut written = Vec::new();
    for &mode in &cfg.modes {
        let states = coeffode::integrate(&p, mode, &grid, &cfg.tol)?;
        let mut table = Table::new(cfg, Some(&p), stamp, &header);
        for (&t, s) in grid.iter().zip(&states) {
            let mut row = t_columns(t, &p).to_vec();
            for z in s.to_array() {
                row.push(z.re);
                row.push(z.im);
            }
            table.nums(&row);
        }
        written.push(table.write(&cfg.output_dir, &format!("coeffs_{mode}"), cfg)?);
    }
    Ok(written)
}

/// Noise budget as `quantity, value, unit` rows.
pub fn dephasing(cfg: &RunConfig, stamp: Stamp) -> Result<Vec<PathBuf>, CliError> {
    let b = noise_budget(&cfg.noise);
    let mut table = Table::new(cfg, None, stamp, &["quantity", "value", "unit"]);
    let rows = [
        ("current_noise_density", b.spectrum, "A/sqrt(Hz)"),
        ("i_rms", b.i_rms, "A"),
        ("gamma_noise", b.gamma_noise.angular, "1/s"),
        ("gamma_noise_per_2pi", b.gamma_noise.cycles, "1/s"),
        ("gamma_deph", b.gamma_deph.angular, "1/s"),
        ("gamma_deph_per_2pi", b.gamma_deph.cycles, "1/s"),
        ("ratio", b.ratio, "1"),
    ];
    for (name, value, unit) in rows {
        table.row(&[name.to_string(), num(value), unit.to_string()]);
    }
    Ok(vec![table.write(&cfg.output_dir, "dephasing", cfg)?])
}
