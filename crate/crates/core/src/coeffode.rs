//! Coefficient equations for the off-diagonal Wigner component.
//!
//! The component is carried as `Wx = exp(a g + b N + c g^2 + d g N + e N^2 + f)`
//! with complex, time-dependent coefficients. Substituting this form into the
//! phase-space equation of motion closes on six coupled Riccati-type ODEs.

use crate::error::{Error, Result};
use crate::ode::{self, Tolerances};
use crate::params::SystemParams;
use crate::{Mode, C64};

/// The six coefficients of the exponential-quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffState {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub e: C64,
    pub f: C64,
}

impl CoeffState {
    pub fn to_array(&self) -> [C64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    pub fn from_slice(v: &[C64]) -> Self {
        Self { a: v[0], b: v[1], c: v[2], d: v[3], e: v[4], f: v[5] }
    }

    /// `4ce - d^2`, four times the determinant of the quadratic form.
    pub fn discriminant(&self) -> C64 {
        4.0 * self.c * self.e - self.d * self.d
    }

    /// Largest per-coefficient deviation, each scaled by `max(1, |reference|)`.
    pub fn max_scaled_deviation(&self, reference: &CoeffState) -> f64 {
        self.to_array()
            .iter()
            .zip(reference.to_array())
            .map(|(x, r)| (x - r).norm() / r.norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Rates entering the coefficient equations, all in rad/s except `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConstants {
    /// Linear drive, `-E_b`.
    pub g: f64,
    /// Qubit-induced squeezing drive, `E_J / 4`.
    pub e_drive: f64,
    /// Damping, `0` or `-2|E_b|`.
    pub i_damp: f64,
    pub omega: f64,
    pub lambda: f64,
}

impl DriveConstants {
    /// The complex rate `-I + iE` that multiplies every nonlinear term.
    pub fn rate(&self) -> C64 {
        C64::new(-self.i_damp, self.e_drive)
    }

    pub fn mode(&self) -> Mode {
        if self.i_damp == 0.0 {
            Mode::Reversible
        } else {
            Mode::Irreversible
        }
    }
}

pub fn make_drive_constants(p: &SystemParams, mode: Mode) -> DriveConstants {
    DriveConstants {
        g: -p.bias,
        e_drive: p.e_j / 4.0,
        i_damp: match mode {
            Mode::Reversible => 0.0,
            Mode::Irreversible => -2.0 * p.bias.abs(),
        },
        omega: p.omega_cross,
        lambda: p.lambda_cross,
    }
}

/// Symmetric superposition with the junction in its unbiased ground state.
pub fn initial_coeffs(p: &SystemParams) -> CoeffState {
    let zero = C64::new(0.0, 0.0);
    CoeffState {
        a: zero,
        b: zero,
        c: C64::new(-1.0 / p.lambda_cross, 0.0),
        d: zero,
        e: C64::new(-p.lambda_cross, 0.0),
        f: C64::new(-std::f64::consts::PI.ln(), 0.0),
    }
}

pub fn derivative(s: &CoeffState, k: &DriveConstants) -> CoeffState {
    let (w, l, g) = (k.omega, k.lambda, k.g);
    let r = k.rate();
    let i_e = C64::new(0.0, k.e_drive);
    CoeffState {
        a: s.b * (w / l) + s.d * g + r * 0.5 * s.b * s.d,
        b: -s.a * (l * w) + s.e * (2.0 * g) + r * s.e * s.b,
        c: s.d * (w / l) - i_e + r * 0.25 * s.d * s.d,
        d: -s.c * (2.0 * l * w) + s.e * (2.0 * w / l) + r * s.e * s.d,
        e: -s.d * (l * w) + r * s.e * s.e,
        f: s.b * g + r * 0.25 * (2.0 * s.e + s.b * s.b),
    }
}

fn guard(t: f64, v: &[C64]) -> Result<()> {
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Integrability { t, what: "non-finite coefficient".into() });
    }
    if v[2].re >= 0.0 {
        return Err(Error::Integrability { t, what: format!("Re c = {} is no longer negative", v[2].re) });
    }
    if v[4].re >= 0.0 {
        return Err(Error::Integrability { t, what: format!("Re e = {} is no longer negative", v[4].re) });
    }
    Ok(())
}

/// Integrates from an arbitrary initial state with explicit drive constants.
pub fn integrate_from(
    start: &CoeffState,
    k: &DriveConstants,
    t_grid: &[f64],
    tol: &Tolerances,
) -> Result<Vec<CoeffState>> {
    if let Some(&t) = t_grid.first() {
        if t != 0.0 {
            return Err(Error::Parameter(format!("time grid must start at 0, got {t}")));
        }
    }
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        dy.copy_from_slice(&derivative(&CoeffState::from_slice(y), k).to_array());
    };
    let sol = ode::integrate_guarded(rhs, guard, &start.to_array(), t_grid, tol).map_err(|e| match e {
        Error::Integrator { t, what } => Error::Integrability { t, what },
        other => other,
    })?;
    Ok(sol.iter().map(|v| CoeffState::from_slice(v)).collect())
}

/// Coefficient trajectory on `t_grid` (seconds, starting at 0).
pub fn integrate(p: &SystemParams, mode: Mode, t_grid: &[f64], tol: &Tolerances) -> Result<Vec<CoeffState>> {
    integrate_from(&initial_coeffs(p), &make_drive_constants(p, mode), t_grid, tol)
}

/// `n + 1` equally spaced times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
}
