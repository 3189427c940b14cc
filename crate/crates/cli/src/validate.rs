//! Validation suites with a machine-readable report.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::ValueEnum;

use jjreadout_core::closedform::{cde_quartic_closed, cde_from_amplitude, integrate_amplitude, offdiag_closedform};
use jjreadout_core::coeffode::{self, uniform_grid, CoeffState};
use jjreadout_core::lindblad::{classical_limit_ladder, ClassicalLimitRun};
use jjreadout_core::ode::Tolerances;
use jjreadout_core::residual::pde_residual;
use jjreadout_core::{Error, Mode, SystemParams, C64};

use crate::commands::system;
use crate::config::RunConfig;
use crate::output::{num, Stamp, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Oracle,
    ClassicalLimit,
    PdeResidual,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
    /// Reported value without a bound.
    Info,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
            Status::Info => "INFO",
        }
    }
}

/// One checked property: `measured <= bound` unless stated otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub property: String,
    pub status: Status,
    pub measured: f64,
    pub bound: f64,
}

impl Check {
    fn at_most(property: impl Into<String>, measured: f64, bound: f64) -> Self {
        let status = if measured <= bound { Status::Pass } else { Status::Fail };
        Self { property: property.into(), status, measured, bound }
    }

    fn failed(property: impl Into<String>) -> Self {
        Self { property: property.into(), status: Status::Fail, measured: f64::NAN, bound: f64::NAN }
    }
}

fn tight() -> Tolerances {
    Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() }
}

fn coeff_deviation(x: &CoeffState, reference: &CoeffState) -> f64 {
    let mut wrapped = *x;
    wrapped.f.im -= ((x.f.im - reference.f.im) / (2.0 * PI)).round() * 2.0 * PI;
    wrapped.max_scaled_deviation(reference)
}

fn cde_deviation(x: (C64, C64, C64), s: &CoeffState) -> f64 {
    [(x.0, s.c), (x.1, s.d), (x.2, s.e)].iter().map(|(a, b)| (a - b).norm() / b.norm().max(1.0)).fold(0.0, f64::max)
}

fn oracle(p: &SystemParams, out: &mut Vec<Check>) {
    let grid = uniform_grid(2.0 * p.t0, 2000);
    let rev = match coeffode::integrate(p, Mode::Reversible, &grid, &tight()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("oracle: coefficient integration failed: {e}");
            out.push(Check::failed("oracle.closed_form_reversible"));
            return;
        }
    };
    let closed: Result<f64, Error> = grid
        .iter()
        .zip(&rev)
        .map(|(&t, s)| offdiag_closedform(p, t).map(|c| coeff_deviation(&c, s)))
        .try_fold(0.0, |m: f64, d| d.map(|d| m.max(d)));
    out.push(match closed {
        Ok(d) => Check::at_most("oracle.closed_form_reversible", d, 1e-6),
        Err(e) => {
            eprintln!("oracle: closed form failed: {e}");
            Check::failed("oracle.closed_form_reversible")
        }
    });

    let k = coeffode::make_drive_constants(p, Mode::Reversible);
    let amplitude = integrate_amplitude(p, Mode::Reversible, &grid, &tight()).map(|samples| {
        samples
            .iter()
            .zip(&grid)
            .zip(&rev)
            .filter_map(|((s, &t), r)| cde_from_amplitude(&s.u, &k, t).ok().map(|c| cde_deviation(c, r)))
            .fold(0.0, f64::max)
    });
    out.push(match amplitude {
        Ok(d) => Check::at_most("oracle.amplitude_reversible", d, 1e-5),
        Err(e) => {
            eprintln!("oracle: amplitude route failed: {e}");
            Check::failed("oracle.amplitude_reversible")
        }
    });

    let irr_grid = uniform_grid(2.0 * p.t0, 400);
    let damped = coeffode::integrate(p, Mode::Irreversible, &irr_grid, &tight()).and_then(|ode| {
        let closed = cde_quartic_closed(p, Mode::Irreversible, &irr_grid)?;
        Ok(closed.iter().zip(&ode).map(|(c, s)| cde_deviation(*c, s)).fold(0.0, f64::max))
    });
    out.push(match damped {
        Ok(d) => Check::at_most("oracle.quartic_irreversible", d, 1e-5),
        Err(Error::Singular(_)) => Check {
            property: "oracle.quartic_irreversible".into(),
            status: Status::Skip,
            measured: f64::NAN,
            bound: 1e-5,
        },
        Err(e) => {
            eprintln!("oracle: damped closed form failed: {e}");
            Check::failed("oracle.quartic_irreversible")
        }
    });
}

fn classical_limit(out: &mut Vec<Check>) {
    let runs: Vec<ClassicalLimitRun> = [1e-2, 1e-3, 1e-4].iter().map(|&nu| ClassicalLimitRun::protocol(nu)).collect();
    match classical_limit_ladder(&runs) {
        Ok(reports) => {
            for r in &reports {
                out.push(Check {
                    property: format!("classical_limit.relative_error_nu_{:.0e}", r.run.nu),
                    status: Status::Info,
                    measured: r.relative_error,
                    bound: f64::NAN,
                });
            }
            let errs: Vec<f64> = reports.iter().map(|r| r.relative_error).collect();
            let monotone = errs.windows(2).all(|w| w[1] < w[0]);
            out.push(Check::at_most("classical_limit.error_at_nu_1e-4", errs[2], 0.05));
            out.push(Check {
                property: "classical_limit.monotone".into(),
                status: if monotone { Status::Pass } else { Status::Fail },
                measured: if monotone { 1.0 } else { 0.0 },
                bound: 1.0,
            });
        }
        Err(e) => {
            eprintln!("classical limit failed: {e}");
            out.push(Check::failed("classical_limit.error_at_nu_1e-4"));
        }
    }
}

fn residual(p: &SystemParams, out: &mut Vec<Check>) {
    for (label, frac) in [("T0/8", 0.125), ("T0/4", 0.25), ("T0/2", 0.5)] {
        match pde_residual(p, Mode::Irreversible, frac * p.t0, 41) {
            Ok(r) => {
                out.push(Check::at_most(format!("pde_residual.{label}"), r.extrapolated, 1e-4));
                out.push(Check {
                    property: format!("pde_residual.{label}.refinement_ratio"),
                    status: if r.converging() { Status::Pass } else { Status::Fail },
                    measured: r.fine / r.coarse,
                    bound: 1.0,
                });
            }
            Err(e) => {
                eprintln!("pde residual at {label} failed: {e}");
                out.push(Check::failed(format!("pde_residual.{label}")));
            }
        }
    }
}

pub fn run_checks(cfg: &RunConfig, suite: Suite) -> Result<Vec<Check>, CliError> {
    let p = system(cfg)?;
    let mut out = Vec::new();
    if matches!(suite, Suite::Oracle | Suite::All) {
        oracle(&p, &mut out);
    }
    if matches!(suite, Suite::ClassicalLimit | Suite::All) {
        classical_limit(&mut out);
    }
    if matches!(suite, Suite::PdeResidual | Suite::All) {
        residual(&p, &mut out);
    }
    Ok(out)
}

/// Runs the suite, prints the report, writes it to the output directory and
/// fails with a validation error if any property fails.
pub fn run(cfg: &RunConfig, stamp: Stamp, suite: Suite) -> Result<Vec<PathBuf>, CliError> {
    let checks = run_checks(cfg, suite)?;
    let p = system(cfg)?;
    let mut table = Table::new(cfg, Some(&p), stamp, &["property", "status", "measured", "bound"]);
    for c in &checks {
        table.row(&[c.property.clone(), c.status.label().to_string(), num(c.measured), num(c.bound)]);
    }
    let name = match suite {
        Suite::Oracle => "validate_oracle",
        Suite::ClassicalLimit => "validate_classical_limit",
        Suite::PdeResidual => "validate_pde_residual",
        Suite::All => "validate_all",
    };
    let path = table.write(&cfg.output_dir, name, cfg)?;
    for c in &checks {
        println!("{},{},{},{}", c.property, c.status.label(), num(c.measured), num(c.bound));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.property.as_str()).collect();
    if failed.is_empty() {
        Ok(vec![path])
    } else {
        Err(CliError::Validation(format!("{} properties failed: {}", failed.len(), failed.join(", "))))
    }
}
