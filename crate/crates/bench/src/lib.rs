//! Shared inputs for the benchmarks.

use jjreadout_core::coeffode::uniform_grid;
use jjreadout_core::ode::Tolerances;
use jjreadout_core::SystemParams;

/// Device parameters used by every benchmark.
pub fn device() -> SystemParams {
    SystemParams::quantronium()
}

/// `n + 1` samples over `[0, periods * T0]`.
pub fn grid(p: &SystemParams, periods: f64, n: usize) -> Vec<f64> {
    uniform_grid(periods * p.t0, n)
}

pub fn tolerances() -> Tolerances {
    Tolerances::default()
}
