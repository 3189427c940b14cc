//! Closed-form oracles for the off-diagonal coefficients.
//!
//! Two independent constructions:
//!
//! * Reversible mode only: each qubit branch evolves a pure Gaussian wave
//!   packet in its own displaced well. The cross Wigner function of the two
//!   packets is again exponential-quadratic, and its coefficients follow from
//!   the branch moments (mean, complex width, dynamical phase).
//! * Both modes: the quadratic coefficients `c, d, e` reduce, through a
//!   Moebius-type change of variables, to a constant-coefficient fourth-order
//!   linear ODE solved by a sum of four exponentials. The linear coefficients
//!   `a, b` then follow from a forced parametric oscillator.

use crate::coeffode::{make_drive_constants, CoeffState, DriveConstants};
use crate::error::{Error, Result};
use crate::ode::{self, Tolerances};
use crate::params::SystemParams;
use crate::{Branch, Mode, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Moments of one branch's pure Gaussian wave packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussMoments {
    pub mean_gamma: f64,
    pub mean_n: f64,
    /// Complex inverse width; `Re sigma = 1 / (2 var_gamma)`.
    pub sigma: C64,
    pub var_gamma: f64,
    /// Half the dynamical phase of the packet.
    pub phase: f64,
}

/// Oscillator constants `(omega, chi, eps)` of the branch Hamiltonians in the cross scaling.
pub fn oscillator_constants(p: &SystemParams) -> (f64, f64, f64) {
    (p.omega_cross, p.e_j * p.lambda_cross / 16.0, -p.bias * p.gamma_cross)
}

/// Exact wave-packet moments for one branch in reversible mode.
pub fn moments_reversible(p: &SystemParams, branch: Branch, t: f64) -> Result<GaussMoments> {
    let (w, chi, eps) = oscillator_constants(p);
    let l = p.lambda_cross;
    let s = branch.sign();
    let w2 = w * w + s * 4.0 * w * chi;
    if w2 <= 0.0 {
        return Err(Error::Regime(format!("omega^2 {} 4 omega chi = {w2} <= 0", if s > 0.0 { "+" } else { "-" })));
    }
    let big = w2.sqrt();
    let x = big * t;
    let stiff = w + s * 4.0 * chi;
    let breathing = w + s * 2.0 * chi * (1.0 + (2.0 * x).cos());

    let mean_gamma = (2.0 * l).sqrt() * eps * (x.cos() - 1.0) / stiff;
    let mean_n = -std::f64::consts::SQRT_2 * eps * x.sin() / (l * w2).sqrt();
    let sigma = C64::new(w * w + s * 4.0 * chi * w, s * 2.0 * chi * big * (2.0 * x).sin()) / (l * w * breathing);
    let var_gamma = l * breathing / (2.0 * stiff);

    // Dynamical phase: action of the classical orbit, minus the N*g/2 boundary
    // term, minus half the winding of the width function.
    let kappa = w * l;
    let k = stiff / l;
    let force = eps / (l / 2.0).sqrt();
    let offset = force / k;
    let r = kappa / l / big;
    let winding = x + ((r - 1.0) * x.sin() * x.cos() / (x.cos().powi(2) + r * x.sin().powi(2))).atan();
    let action = -(k * offset * offset / (4.0 * big)) * (2.0 * x).sin() + force * force * t / (2.0 * k);
    let phase = action - mean_n * mean_gamma / 2.0 - 0.5 * winding;

    Ok(GaussMoments { mean_gamma, mean_n, sigma, var_gamma, phase })
}

/// Off-diagonal coefficients in reversible mode, assembled from both branches.
pub fn offdiag_closedform(p: &SystemParams, t: f64) -> Result<CoeffState> {
    let mp = moments_reversible(p, Branch::Plus, t)?;
    let mm = moments_reversible(p, Branch::Minus, t)?;
    let (gp, np, sp) = (mp.mean_gamma, mp.mean_n, mp.sigma);
    let (gm, nm, smc) = (mm.mean_gamma, mm.mean_n, mm.sigma.conj());
    let den = sp + smc;
    if den.norm() < 1e-12 * (sp.norm() + smc.norm()) {
        return Err(Error::Degenerate(format!("sigma+ + conj(sigma-) vanishes at t = {t:e}")));
    }
    let x = I * np + I * nm + sp * gp - smc * gm;
    let a = x * (smc - sp) / den + I * np - I * nm + sp * gp + smc * gm;
    let b = (2.0 * (np + nm) - 2.0 * I * sp * gp + 2.0 * I * smc * gm) / den;
    let c = -0.5 * sp - 0.5 * smc + (sp - smc) * (sp - smc) / (2.0 * den);
    let d = 2.0 * I * (sp - smc) / den;
    let e = -2.0 / den;
    let norm = 1.0 / (std::f64::consts::PI * den.sqrt() * (mp.var_gamma * mm.var_gamma).powf(0.25));
    let f = norm.ln() - 0.5 * I * (np * gp - nm * gm) - 0.5 * sp * gp * gp - 0.5 * smc * gm * gm
        + x * x / (2.0 * den)
        + I * (mp.phase - mm.phase);
    Ok(CoeffState { a, b, c, d, e, f })
}

/// Roots `(r1, r2)` of the quartic's characteristic equation; the four rates are `+-r1, +-r2`.
pub fn eigenrates(k: &DriveConstants) -> (C64, C64) {
    let (w, l) = (k.omega, k.lambda);
    let disc = (w * w + I * l * l * k.e_drive * k.rate()).sqrt();
    let r1 = (-2.0 * w * w + 2.0 * w * disc).sqrt();
    let r2 = (-2.0 * w * w - 2.0 * w * disc).sqrt();
    (r1, r2)
}

/// Coupling constant `q` of `u'''' + 4 w^2 u'' - q u = 0`.
fn quartic_coupling(k: &DriveConstants) -> C64 {
    4.0 * I * k.lambda * k.lambda * k.omega * k.omega * k.e_drive * k.rate()
}

/// Snapshot of the exponential-sum solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticState {
    pub lambda1: C64,
    pub lambda2: C64,
    pub c1: C64,
    pub c2: C64,
    pub c3: C64,
    pub c4: C64,
    pub p: C64,
}

/// Exponential-sum solution for the Moebius variable `P` (irreversible mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusSolution {
    pub drive: DriveConstants,
    pub lambda1: C64,
    pub lambda2: C64,
    /// Amplitudes of `e^{r1 t}, e^{-r1 t}, e^{r2 t}, e^{-r2 t}`.
    pub amps: [C64; 4],
}

impl MoebiusSolution {
    /// Refuses when the damping vanishes: the quadratic form then keeps its
    /// initial determinant and the Moebius variable is infinite.
    pub fn new(p: &SystemParams, mode: Mode) -> Result<Self> {
        let k = make_drive_constants(p, mode);
        if k.i_damp == 0.0 {
            return Err(Error::Singular(
                "the exponential-sum amplitudes are undefined without damping; integrate the quartic instead".into(),
            ));
        }
        let start = moebius_start(p, &k);
        let (r1, r2) = eigenrates(&k);
        let (s1r, s2r) = (r1 * r1, r2 * r2);
        let gap = s1r - s2r;
        let [p0, p1, p2, p3] = start;
        let even1 = (p2 - s2r * p0) / gap;
        let even2 = (s1r * p0 - p2) / gap;
        let odd1 = (p3 - s2r * p1) / (r1 * gap);
        let odd2 = (s1r * p1 - p3) / (r2 * gap);
        Ok(Self {
            drive: k,
            lambda1: r1,
            lambda2: r2,
            amps: [(even1 + odd1) / 2.0, (even1 - odd1) / 2.0, (even2 + odd2) / 2.0, (even2 - odd2) / 2.0],
        })
    }

    /// `[P, P', P'', P''']` at time `t`.
    pub fn derivatives(&self, t: f64) -> [C64; 4] {
        let rates = [self.lambda1, -self.lambda1, self.lambda2, -self.lambda2];
        let mut out = [C64::new(0.0, 0.0); 4];
        for (amp, r) in self.amps.iter().zip(rates) {
            let mut term = amp * (r * t).exp();
            for o in out.iter_mut() {
                *o += term;
                term *= r;
            }
        }
        out
    }

    pub fn state(&self, t: f64) -> QuarticState {
        let [c1, c2, c3, c4] = self.amps;
        QuarticState { lambda1: self.lambda1, lambda2: self.lambda2, c1, c2, c3, c4, p: self.derivatives(t)[0] }
    }
}

/// `P` and its first three derivatives at `t = 0`.
pub fn moebius_start(p: &SystemParams, k: &DriveConstants) -> [C64; 4] {
    let (w, l) = (k.omega, k.lambda);
    let kk = k.rate();
    let c0 = -1.0 / p.lambda_cross;
    let e0 = -p.lambda_cross;
    let m0 = C64::new((4.0 * c0 * e0) / 16.0, 0.0);
    let beta = I * k.e_drive / (4.0 * kk);
    let p0 = (m0 + beta) / (m0 - beta);
    let psi = 1.0 - p0;
    let p1 = e0 * kk * psi;
    let p2 = C64::new(0.0, 0.0);
    let p3 = 2.0 * kk * l * l * w * w * c0 * psi - 2.0 * w * w * p1;
    [p0, p1, p2, p3]
}

pub fn quartic_p(p: &SystemParams, mode: Mode, t: f64) -> Result<QuarticState> {
    Ok(MoebiusSolution::new(p, mode)?.state(t))
}

/// Numerically integrates the quartic for `P` from its closed-form start.
pub fn integrate_moebius(p: &SystemParams, mode: Mode, grid: &[f64], tol: &Tolerances) -> Result<Vec<[C64; 4]>> {
    let k = make_drive_constants(p, mode);
    if k.i_damp == 0.0 {
        return Err(Error::Singular("the Moebius variable is infinite without damping".into()));
    }
    let q = quartic_coupling(&k);
    let w = k.omega;
    let q_s = q / (w * w * w * w);
    let rhs = move |_: f64, y: &[C64], dy: &mut [C64]| {
        dy[0] = y[1];
        dy[1] = y[2];
        dy[2] = y[3];
        dy[3] = -4.0 * y[2] + q_s * y[0];
    };
    let s = moebius_start(p, &k);
    let start = [s[0], s[1] / w, s[2] / (w * w), s[3] / (w * w * w)];
    let tau: Vec<f64> = grid.iter().map(|t| t * w).collect();
    let sol = ode::integrate(rhs, &start, &tau, tol)?;
    Ok(sol.into_iter().map(|v| [v[0], v[1] * w, v[2] * w * w, v[3] * w * w * w]).collect())
}

/// Offset `u_inf` such that `u = (1 - P)/(1 - P(0))` obeys `u'''' + 4w^2 u'' = q (u - u_inf)`.
/// Zero without damping, where `u` is the linearizing amplitude itself.
fn amplitude_offset(p: &SystemParams, k: &DriveConstants) -> C64 {
    if k.i_damp == 0.0 {
        return C64::new(0.0, 0.0);
    }
    1.0 / (1.0 - moebius_start(p, k)[0])
}

/// Initial `[u, u', u'', u''']` for the normalized amplitude `u(0) = 1`.
fn amplitude_start(p: &SystemParams, k: &DriveConstants) -> [C64; 4] {
    let (w, l) = (k.omega, k.lambda);
    let kk = k.rate();
    let c0 = -1.0 / p.lambda_cross;
    let e0 = -p.lambda_cross;
    let u1 = -kk * e0;
    [C64::new(1.0, 0.0), u1, C64::new(0.0, 0.0), 2.0 * w * w * kk * e0 - 2.0 * kk * l * l * w * w * c0]
}

/// Quadratic coefficients from an amplitude `u` and its derivatives,
/// `e = -u'/(k u)`, `d = u''/(k l w u)`, `c = -(2 w^2 u' + u''')/(2 k l^2 w^2 u)`.
pub fn cde_from_amplitude(u: &[C64; 4], k: &DriveConstants, t: f64) -> Result<(C64, C64, C64)> {
    if u[0].norm() < 1e-10 {
        return Err(Error::Pole { t, value: u[0].norm() });
    }
    let (w, l) = (k.omega, k.lambda);
    let kk = k.rate();
    let e = -u[1] / (kk * u[0]);
    let d = u[2] / (kk * l * w * u[0]);
    let c = -(2.0 * w * w * u[1] + u[3]) / (2.0 * kk * l * l * w * w * u[0]);
    Ok((c, d, e))
}

/// Back-substitution from `[P, P', P'', P''']`; the amplitude is `1 - P`.
pub fn cde_from_quartic(series: &[[C64; 4]], k: &DriveConstants, grid: &[f64]) -> Result<Vec<(C64, C64, C64)>> {
    series
        .iter()
        .zip(grid)
        .map(|(d, &t)| cde_from_amplitude(&[1.0 - d[0], -d[1], -d[2], -d[3]], k, t))
        .collect()
}

/// Closed-form `c, d, e` (damped modes only).
pub fn cde_quartic_closed(p: &SystemParams, mode: Mode, grid: &[f64]) -> Result<Vec<(C64, C64, C64)>> {
    let sol = MoebiusSolution::new(p, mode)?;
    let series: Vec<_> = grid.iter().map(|&t| sol.derivatives(t)).collect();
    cde_from_quartic(&series, &sol.drive, grid)
}

/// Trajectory of the linearizing amplitude, its derivatives, and the forced
/// oscillator carrying the linear coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSample {
    pub u: [C64; 4],
    pub y: C64,
    pub y_dot: C64,
    /// Continuously tracked `sqrt(u)`.
    pub root: C64,
}

/// Integrates the amplitude quartic together with the oscillator for `y`.
///
/// `y'' + (w^2 + u''/u - 3/4 (u'/u)^2) y = -w^2 b0 sqrt(u)`, with `b0 = -2G/k`
/// the stationary value of `b`, `y = (b - b0) sqrt(u)`.
pub fn integrate_amplitude(p: &SystemParams, mode: Mode, grid: &[f64], tol: &Tolerances) -> Result<Vec<AmplitudeSample>> {
    let k = make_drive_constants(p, mode);
    let kk = k.rate();
    let q = quartic_coupling(&k);
    let w2 = k.omega * k.omega;
    let offset = amplitude_offset(p, &k);
    let b0 = -2.0 * k.g / kk;
    let u = amplitude_start(p, &k);
    let beta0 = -b0;
    let beta_dot0 = kk * (-p.lambda_cross) * beta0;
    // Integrate in units of the oscillator period: tau = w t, derivatives scaled by w^n.
    let w = k.omega;
    let q_s = q / (w2 * w2);
    let y0 = [
        u[0],
        u[1] / w,
        u[2] / w2,
        u[3] / (w2 * w),
        beta0,
        (beta_dot0 + beta0 * u[1] / 2.0) / w,
        C64::new(1.0, 0.0),
    ];
    let rhs = move |_: f64, y: &[C64], dy: &mut [C64]| {
        let (uu, u1, u2, u3, yy, yd, s) = (y[0], y[1], y[2], y[3], y[4], y[5], y[6]);
        dy[0] = u1;
        dy[1] = u2;
        dy[2] = u3;
        dy[3] = -4.0 * u2 + q_s * (uu - offset);
        let l1 = u1 / uu;
        dy[4] = yd;
        dy[5] = -(1.0 + u2 / uu - 0.75 * l1 * l1) * yy - b0 * s;
        dy[6] = u1 / (2.0 * s);
    };
    let guard = |t: f64, y: &[C64]| {
        if y[0].norm() < 1e-10 {
            Err(Error::Pole { t: t / w, value: y[0].norm() })
        } else {
            Ok(())
        }
    };
    let tau: Vec<f64> = grid.iter().map(|t| t * w).collect();
    let sol = ode::integrate_guarded(rhs, guard, &y0, &tau, tol)?;
    Ok(sol
        .into_iter()
        .map(|v| AmplitudeSample {
            u: [v[0], v[1] * w, v[2] * w2, v[3] * w2 * w],
            y: v[4],
            y_dot: v[5] * w,
            root: v[6],
        })
        .collect())
}

/// `c, d, e` via the numerically integrated amplitude (valid in both modes).
pub fn cde_quartic_integrated(p: &SystemParams, mode: Mode, grid: &[f64], tol: &Tolerances) -> Result<Vec<(C64, C64, C64)>> {
    let k = make_drive_constants(p, mode);
    integrate_amplitude(p, mode, grid, tol)?
        .iter()
        .zip(grid)
        .map(|(s, &t)| cde_from_amplitude(&s.u, &k, t))
        .collect()
}

/// Linear coefficients `(a, b)` from the forced oscillator.
pub fn drive_response_y(p: &SystemParams, mode: Mode, grid: &[f64], tol: &Tolerances) -> Result<Vec<(C64, C64)>> {
    let k = make_drive_constants(p, mode);
    let kk = k.rate();
    let b0 = -2.0 * k.g / kk;
    integrate_amplitude(p, mode, grid, tol)?
        .iter()
        .zip(grid)
        .map(|(s, &t)| {
            let (_, _, e) = cde_from_amplitude(&s.u, &k, t)?;
            let beta = s.y / s.root;
            let beta_dot = s.y_dot / s.root - s.y * s.u[1] / (2.0 * s.u[0] * s.root);
            let a = (kk * e * beta - beta_dot) / (k.lambda * k.omega);
            Ok((a, b0 + beta))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffode::{initial_coeffs, integrate, uniform_grid};
    use approx::assert_relative_eq;

    fn tight() -> Tolerances {
        Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() }
    }

    #[test]
    fn moments_at_start_and_trivial_limits() {
        let p = SystemParams::quantronium();
        for b in [Branch::Plus, Branch::Minus] {
            let m = moments_reversible(&p, b, 0.0).unwrap();
            assert_eq!(m.mean_gamma, 0.0);
            assert_eq!(m.mean_n, 0.0);
            let unforced = moments_reversible(&p.with_bias(0.0), b, 3.3e-9).unwrap();
            assert_eq!(unforced.mean_gamma, 0.0);
        }
        let mut i = crate::params::PhysicalInputs::quantronium();
        i.e_j = 0.0;
        let q = crate::params::build_system(&i).unwrap();
        for t in [0.0, 1e-10, 7e-9] {
            let m = moments_reversible(&q, Branch::Plus, t).unwrap();
            assert_relative_eq!(m.var_gamma, q.lambda_cross / 2.0, max_relative = 1e-14);
            assert_relative_eq!(m.sigma.re, 1.0 / q.lambda_cross, max_relative = 1e-14);
            assert_eq!(m.sigma.im, 0.0);
        }
    }

    #[test]
    fn sigma_tracks_variance() {
        let p = SystemParams::quantronium();
        for k in 0..30 {
            let m = moments_reversible(&p, Branch::Minus, p.t0 * k as f64 / 7.0).unwrap();
            assert_relative_eq!(m.sigma.re, 1.0 / (2.0 * m.var_gamma), max_relative = 1e-12);
        }
    }

    #[test]
    fn moments_match_gaussian_module() {
        let p = SystemParams::quantronium();
        for b in [Branch::Plus, Branch::Minus] {
            for k in 0..25 {
                let t = p.t0 * k as f64 / 6.0;
                let m = moments_reversible(&p, b, t).unwrap();
                let g = crate::gaussian::evolve_diagonal(&p, b, Mode::Reversible, t);
                assert_relative_eq!(m.var_gamma, g.var_gamma, max_relative = 1e-9);
                assert_relative_eq!(m.mean_gamma, g.mean_gamma, epsilon = 1e-12, max_relative = 1e-9);
                assert_relative_eq!(m.mean_n, g.mean_n, epsilon = 1e-9, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn regime_error_for_inverted_well() {
        let mut p = SystemParams::quantronium();
        p.e_j = 8.0 * p.omega_cross / p.lambda_cross;
        assert!(matches!(moments_reversible(&p, Branch::Minus, 0.0), Err(Error::Regime(_))));
    }

    #[test]
    fn closed_form_starts_at_initial_coefficients() {
        let p = SystemParams::quantronium();
        let cf = offdiag_closedform(&p, 0.0).unwrap();
        assert!(cf.max_scaled_deviation(&initial_coeffs(&p)) < 1e-12, "{cf:?}");
    }

    #[test]
    fn closed_form_matches_integration_short_window() {
        let p = SystemParams::quantronium();
        let grid = uniform_grid(p.t0 / 2.0, 40);
        let ode = integrate(&p, Mode::Reversible, &grid, &tight()).unwrap();
        for (t, s) in grid.iter().zip(&ode) {
            let cf = offdiag_closedform(&p, *t).unwrap();
            assert!(cf.max_scaled_deviation(s) < 1e-7, "t/T0 = {}", t / p.t0);
        }
    }

    #[test]
    fn eigenrates_imaginary_without_damping() {
        let p = SystemParams::quantronium();
        let (r1, r2) = eigenrates(&make_drive_constants(&p, Mode::Reversible));
        assert!(r1.re.abs() < 1e-9 * r1.norm() && r2.re.abs() < 1e-9 * r2.norm());
        assert!(matches!(MoebiusSolution::new(&p, Mode::Reversible), Err(Error::Singular(_))));
        // No squeezing drive: rates reduce to 0 and 2 i w.
        let mut k = make_drive_constants(&p, Mode::Irreversible);
        k.e_drive = 0.0;
        let (r1, r2) = eigenrates(&k);
        assert!(r1.norm() < 1e-6 * k.omega);
        assert_relative_eq!(r2.im.abs(), 2.0 * k.omega, max_relative = 1e-12);
    }

    #[test]
    fn exponential_sum_satisfies_its_quartic() {
        let p = SystemParams::quantronium();
        let sol = MoebiusSolution::new(&p, Mode::Irreversible).unwrap();
        let q = quartic_coupling(&sol.drive);
        let w2 = sol.drive.omega * sol.drive.omega;
        let h = 2e-3 / sol.drive.omega;
        for k in 1..10 {
            let t = p.t0 * k as f64 / 10.0;
            let d = sol.derivatives(t);
            // Fourth derivative by central difference of the analytic third.
            let d4 = (sol.derivatives(t + h)[3] - sol.derivatives(t - h)[3]) / (2.0 * h);
            let res = d4 + 4.0 * w2 * d[2] - q * d[0];
            assert!(res.norm() < 1e-6 * (d4.norm() + (4.0 * w2 * d[2]).norm()), "k={k}");
        }
    }

    #[test]
    fn amplitude_route_starts_consistently() {
        let p = SystemParams::quantronium();
        for mode in [Mode::Reversible, Mode::Irreversible] {
            let cde = cde_quartic_integrated(&p, mode, &[0.0], &tight()).unwrap();
            let (c, d, e) = cde[0];
            assert_relative_eq!(c.re, -1.0 / p.lambda_cross, max_relative = 1e-12);
            assert!(d.norm() < 1e-12);
            assert_relative_eq!(e.re, -p.lambda_cross, max_relative = 1e-12);
        }
        let k = make_drive_constants(&p, Mode::Irreversible);
        let cde = cde_quartic_closed(&p, Mode::Irreversible, &[0.0]).unwrap();
        assert_relative_eq!(cde[0].0.re, -1.0 / k.lambda, max_relative = 1e-9);
    }

    #[test]
    fn linear_coefficients_vanish_without_force_and_scale_with_it() {
        let p = SystemParams::quantronium();
        let grid = uniform_grid(p.t0 / 4.0, 10);
        let zero = drive_response_y(&p.with_bias(0.0), Mode::Reversible, &grid, &tight()).unwrap();
        assert!(zero.iter().all(|(a, b)| a.norm() == 0.0 && b.norm() == 0.0));

        // In reversible mode the damping does not depend on the force, so only G scales.
        let one = drive_response_y(&p, Mode::Reversible, &grid, &tight()).unwrap();
        let two = drive_response_y(&p.with_bias(2.0 * p.bias), Mode::Reversible, &grid, &tight()).unwrap();
        for ((a1, b1), (a2, b2)) in one.iter().zip(&two) {
            assert!((a2 - 2.0 * a1).norm() <= 1e-9 * a1.norm().max(1e-30) + 1e-12);
            assert!((b2 - 2.0 * b1).norm() <= 1e-9 * b1.norm().max(1e-30) + 1e-12);
        }
    }

    #[test]
    fn quadratic_exponent_grows_quadratically() {
        let p = SystemParams::quantronium();
        let grid: Vec<f64> = (0..=4).map(|k| k as f64 * 1e-14).collect();
        let ab = drive_response_y(&p, Mode::Reversible, &grid, &tight()).unwrap();
        let cde = cde_quartic_integrated(&p, Mode::Reversible, &grid, &tight()).unwrap();
        let form: Vec<C64> = ab
            .iter()
            .zip(&cde)
            .map(|((a, b), (c, d, e))| (b * b * c - a * b * d + a * a * e) / (d * d - 4.0 * c * e))
            .collect();
        assert_eq!(form[0].norm(), 0.0);
        for k in 2..=4 {
            let ratio = form[k].norm() / form[1].norm();
            assert_relative_eq!(ratio, (k * k) as f64, max_relative = 1e-3);
        }
    }
}
