//! Finite-difference residual of the phase-space equation for the
//! off-diagonal component, evaluated on the integrated coefficients.
//!
//! The equation is written out here term by term from the physical constants,
//! independently of the coefficient right-hand side, so a small residual checks
//! both the closure of the Gaussian ansatz and the integration.

use crate::coeffode::{self, CoeffState};
use crate::error::Result;
use crate::observables::{eval_offdiag, offdiag_envelope};
use crate::ode::Tolerances;
use crate::params::SystemParams;
use crate::{Mode, C64};

/// Residual of one evaluation, relative to `omega_x * max|Wx|` on the patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub t: f64,
    /// Spatial step `h` (per axis: gamma, N).
    pub step: (f64, f64),
    pub coarse: f64,
    /// Same with `h/2`.
    pub fine: f64,
    /// Richardson combination of the two.
    pub extrapolated: f64,
    pub peak: f64,
}

impl ResidualReport {
    pub fn converging(&self) -> bool {
        self.fine < self.coarse
    }
}

/// Right-hand side of the equation of motion at one point with spatial step `h`.
struct Stencil<'a> {
    s: &'a CoeffState,
    hg: f64,
    hn: f64,
}

impl Stencil<'_> {
    fn w(&self, g: f64, n: f64) -> C64 {
        eval_offdiag(self.s, g, n)
    }

    fn d_gamma(&self, g: f64, n: f64) -> C64 {
        (self.w(g + self.hg, n) - self.w(g - self.hg, n)) / (2.0 * self.hg)
    }

    fn d_charge(&self, g: f64, n: f64) -> C64 {
        (self.w(g, n + self.hn) - self.w(g, n - self.hn)) / (2.0 * self.hn)
    }

    fn dd_charge(&self, g: f64, n: f64) -> C64 {
        (self.w(g, n + self.hn) - 2.0 * self.w(g, n) + self.w(g, n - self.hn)) / (self.hn * self.hn)
    }
}

#[derive(Clone, Copy)]
struct Equation {
    omega: f64,
    lambda: f64,
    bias: f64,
    diffusion: f64,
    e_j: f64,
}

impl Equation {
    fn new(p: &SystemParams, mode: Mode) -> Self {
        let diffusion = match mode {
            Mode::Reversible => 0.0,
            Mode::Irreversible => p.bias.abs() / 2.0,
        };
        Self { omega: p.omega_cross, lambda: p.lambda_cross, bias: p.bias, diffusion, e_j: p.e_j }
    }

    fn generator(&self, st: &Stencil, g: f64, n: f64) -> C64 {
        let w = st.w(g, n);
        let dg = st.d_gamma(g, n);
        let dn = st.d_charge(g, n);
        let dnn = st.dd_charge(g, n);
        let i = C64::new(0.0, 1.0);
        -self.omega * self.lambda * n * dg + (self.omega / self.lambda) * g * dn - self.bias * dn
            + self.diffusion * dnn
            - i * (self.e_j / 16.0) * (4.0 * g * g * w - dnn)
    }
}

/// Residual at time `t` on a `points x points` patch of `+-3` envelope widths.
///
/// The time derivative is a fourth-order centred difference of the integrated
/// coefficients; spatial derivatives are second-order differences with steps
/// `h` and `h/2`.
pub fn pde_residual(p: &SystemParams, mode: Mode, t: f64, points: usize) -> Result<ResidualReport> {
    let k = coeffode::make_drive_constants(p, mode);
    let fastest = k.omega + p.bias.abs() + p.e_j;
    let dt = (0.01 / fastest).min(t / 4.0);
    let grid = [0.0, t - 2.0 * dt, t - dt, t, t + dt, t + 2.0 * dt];
    let tol = Tolerances { rtol: 1e-13, atol: 1e-15, ..Tolerances::default() };
    let sol = coeffode::integrate(p, mode, &grid, &tol)?;
    let now = sol[3];
    let ((g0, n0), (sg, sn)) = offdiag_envelope(&now)?;

    // Resolve the fastest local oscillation as well as the envelope.
    let wave = |u: &CoeffState, g: f64, n: f64| {
        let kg = (u.a + 2.0 * u.c * g + u.d * n).im.abs();
        let kn = (u.b + u.d * g + 2.0 * u.e * n).im.abs();
        (kg, kn)
    };
    let mut kg_max = 1.0 / sg;
    let mut kn_max = 1.0 / sn;
    for (dg, dn) in [(-3.0, -3.0), (-3.0, 3.0), (3.0, -3.0), (3.0, 3.0), (0.0, 0.0)] {
        let (kg, kn) = wave(&now, g0 + dg * sg, n0 + dn * sn);
        kg_max = kg_max.max(kg);
        kn_max = kn_max.max(kn);
    }
    let step = (0.02 / kg_max, 0.02 / kn_max);

    let eq = Equation::new(p, mode);
    let coarse = Stencil { s: &now, hg: step.0, hn: step.1 };
    let fine = Stencil { s: &now, hg: step.0 / 2.0, hn: step.1 / 2.0 };
    let axis = |c: f64, s: f64| -> Vec<f64> {
        (0..points).map(|i| c + s * (-3.0 + 6.0 * i as f64 / (points - 1).max(1) as f64)).collect()
    };
    let (gs, ns) = (axis(g0, sg), axis(n0, sn));

    let (mut r_coarse, mut r_fine, mut r_extra, mut peak) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &g in &gs {
        for &n in &ns {
            let w = |i: usize| eval_offdiag(&sol[i], g, n);
            let dw_dt = (-w(5) + 8.0 * w(4) - 8.0 * w(2) + w(1)) / (12.0 * dt);
            let gen_c = eq.generator(&coarse, g, n);
            let gen_f = eq.generator(&fine, g, n);
            let gen_x = gen_f + (gen_f - gen_c) / 3.0;
            r_coarse = r_coarse.max((dw_dt - gen_c).norm());
            r_fine = r_fine.max((dw_dt - gen_f).norm());
            r_extra = r_extra.max((dw_dt - gen_x).norm());
            peak = peak.max(eval_offdiag(&now, g, n).norm());
        }
    }
    let scale = eq.omega * peak;
    Ok(ResidualReport {
        t,
        step,
        coarse: r_coarse / scale,
        fine: r_fine / scale,
        extrapolated: r_extra / scale,
        peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreversible_residual_is_small_and_converges() {
        let p = SystemParams::quantronium();
        let r = pde_residual(&p, Mode::Irreversible, p.t0 / 8.0, 21).unwrap();
        assert!(r.converging(), "{r:?}");
        assert!(r.extrapolated < 1e-4, "{r:?}");
    }

    #[test]
    fn reversible_residual_is_small() {
        let p = SystemParams::quantronium();
        let r = pde_residual(&p, Mode::Reversible, p.t0 / 4.0, 21).unwrap();
        assert!(r.extrapolated < 1e-4, "{r:?}");
    }

    #[test]
    fn wrong_sign_drive_is_detected() {
        // Flipping the bias only in the equation must leave a large residual.
        let p = SystemParams::quantronium();
        let t = p.t0 / 8.0;
        let good = pde_residual(&p, Mode::Reversible, t, 11).unwrap();
        let sol = coeffode::integrate(&p, Mode::Reversible, &[0.0, t], &Tolerances::default()).unwrap();
        let mut eq = Equation::new(&p, Mode::Reversible);
        eq.bias = -eq.bias;
        let st = Stencil { s: &sol[1], hg: good.step.0, hn: good.step.1 };
        let ((g0, n0), _) = offdiag_envelope(&sol[1]).unwrap();
        let k = coeffode::make_drive_constants(&p, Mode::Reversible);
        let exact = coeffode::derivative(&sol[1], &k);
        let dw = crate::observables::offdiag_exponent(&exact, g0, n0) * eval_offdiag(&sol[1], g0, n0);
        let off = (dw - eq.generator(&st, g0, n0)).norm() / (eq.omega * good.peak);
        assert!(off > 1e3 * good.extrapolated.max(1e-12), "{off} vs {good:?}");
    }
}
