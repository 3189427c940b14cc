//! Physical read-outs: Wigner surfaces, marginals, Pauli expectations and the
//! Bloch-vector length.

use rayon::prelude::*;

use crate::coeffode::{self, CoeffState};
use crate::error::{Error, Result};
use crate::gaussian::{evolve_diagonal, GaussianState};
use crate::ode::Tolerances;
use crate::params::SystemParams;
use crate::{Branch, Mode, C64};

/// Largest real exponent passed to `exp` before clamping.
pub const EXPONENT_CAP: f64 = 700.0;

/// Exponent `a g + b N + c g^2 + d g N + e N^2 + f` of the off-diagonal component.
pub fn offdiag_exponent(s: &CoeffState, gamma: f64, n: f64) -> C64 {
    s.a * gamma + s.b * n + s.c * gamma * gamma + s.d * gamma * n + s.e * n * n + s.f
}

/// Off-diagonal Wigner component at a point. The real part of the exponent is
/// clamped at [`EXPONENT_CAP`]; use [`offdiag_exponent`] to detect clamping.
pub fn eval_offdiag(s: &CoeffState, gamma: f64, n: f64) -> C64 {
    let mut x = offdiag_exponent(s, gamma, n);
    if x.re > EXPONENT_CAP {
        x.re = EXPONENT_CAP;
    }
    x.exp()
}

/// Square root of `det A` for the form `-u^T A u`, `A = -[[c, d/2], [d/2, e]]`,
/// on the branch of the convergent Gaussian integral: product of principal
/// roots of the eigenvalues, which lie in the right half-plane.
fn convergent_root(s: &CoeffState, t: f64) -> Result<C64> {
    let a11 = -s.c;
    let a22 = -s.e;
    let a12 = -s.d / 2.0;
    // Real part of A must be positive definite.
    if !(a11.re > 0.0 && a11.re * a22.re - a12.re * a12.re > 0.0) {
        return Err(Error::Integrability { t, what: "real part of the quadratic form is not definite".into() });
    }
    let half = (a11 + a22) / 2.0;
    let r = (half * half - (a11 * a22 - a12 * a12)).sqrt();
    Ok((half + r).sqrt() * (half - r).sqrt())
}

fn integral_with_root(s: &CoeffState, root_q: C64) -> C64 {
    let disc = s.discriminant();
    let quad = (s.b * s.b * s.c - s.a * s.b * s.d + s.a * s.a * s.e) / (-disc);
    2.0 * std::f64::consts::PI / root_q * (s.f + quad).exp()
}

/// `int int Wx dg dN` in closed form.
pub fn offdiag_integral(s: &CoeffState) -> Result<C64> {
    let root = 2.0 * convergent_root(s, f64::NAN)?;
    Ok(integral_with_root(s, root))
}

/// Bloch-vector length `|int int Wx|`; independent of the square-root branch.
pub fn bloch_length(s: &CoeffState) -> f64 {
    let disc = s.discriminant();
    let quad = (s.b * s.b * s.c - s.a * s.b * s.d + s.a * s.a * s.e) / (-disc);
    2.0 * std::f64::consts::PI / disc.norm().sqrt() * (s.f.re + quad.re).exp()
}

/// Bloch-vector time series.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochSeries {
    pub times: Vec<f64>,
    pub lengths: Vec<f64>,
    pub sx: Vec<f64>,
    pub sy: Vec<f64>,
}

/// Largest phase step of the tracked root allowed between adjacent samples.
pub const BRANCH_JUMP_LIMIT: f64 = 0.5;

/// Pauli expectations along a trajectory, following the square-root branch by
/// continuity from the convergent branch at the first sample.
pub fn bloch_series(times: &[f64], states: &[CoeffState]) -> Result<BlochSeries> {
    let mut out = BlochSeries {
        times: times.to_vec(),
        lengths: Vec::with_capacity(states.len()),
        sx: Vec::with_capacity(states.len()),
        sy: Vec::with_capacity(states.len()),
    };
    let mut prev: Option<C64> = None;
    for (&t, s) in times.iter().zip(states) {
        let root = match prev {
            None => 2.0 * convergent_root(s, t)?,
            Some(p) => {
                let r = s.discriminant().sqrt();
                let r = if (r - p).norm() <= (r + p).norm() { r } else { -r };
                let jump = (r / p).arg().abs();
                if jump > BRANCH_JUMP_LIMIT {
                    return Err(Error::Branch { t, jump });
                }
                r
            }
        };
        prev = Some(root);
        let z = integral_with_root(s, root);
        out.lengths.push(bloch_length(s));
        out.sx.push(z.re);
        out.sy.push(z.im);
    }
    Ok(out)
}

/// Integrates the coefficients on `times` and returns the Bloch series.
pub fn bloch_trajectory(p: &SystemParams, mode: Mode, times: &[f64], tol: &Tolerances) -> Result<BlochSeries> {
    let states = coeffode::integrate(p, mode, times, tol)?;
    bloch_series(times, &states)
}

/// `(<sx>, <sy>, <sz>)` at a single time.
pub fn pauli_expectations(p: &SystemParams, mode: Mode, t: f64, tol: &Tolerances) -> Result<(f64, f64, f64)> {
    let grid = if t == 0.0 { vec![0.0] } else { vec![0.0, t] };
    let states = coeffode::integrate(p, mode, &grid, tol)?;
    let z = offdiag_integral(states.last().expect("non-empty grid"))?;
    // Both diagonal components carry unit weight at all times.
    let sz = 0.5 * (1.0 - 1.0);
    Ok((z.re, z.im, sz))
}

/// Sampling of the qubit-projected Wigner surface.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub gamma_axis: Vec<f64>,
    pub n_axis: Vec<f64>,
    /// Row-major, `gamma` outer.
    pub values: Vec<f64>,
    pub t: f64,
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_axis.len() + j]
    }
}

/// Grid resolution and optional explicit window `(g_min, g_max, n_min, n_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_gamma: usize,
    pub n_n: usize,
    pub window: Option<(f64, f64, f64, f64)>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_gamma: 401, n_n: 401, window: None }
    }
}

/// Window spanning `+-k` standard deviations of both diagonal Gaussians.
pub fn covering_window(parts: &[GaussianState], k: f64) -> (f64, f64, f64, f64) {
    let sg = parts.iter().map(|g| g.var_gamma.sqrt()).fold(0.0, f64::max);
    let sn = parts.iter().map(|g| g.var_n.sqrt()).fold(0.0, f64::max);
    let gmin = parts.iter().map(|g| g.mean_gamma).fold(f64::INFINITY, f64::min);
    let gmax = parts.iter().map(|g| g.mean_gamma).fold(f64::NEG_INFINITY, f64::max);
    let nmin = parts.iter().map(|g| g.mean_n).fold(f64::INFINITY, f64::min);
    let nmax = parts.iter().map(|g| g.mean_n).fold(f64::NEG_INFINITY, f64::max);
    (gmin - k * sg, gmax + k * sg, nmin - k * sn, nmax + k * sn)
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Projection onto the initial qubit state, `(W+ + W-)/4 + Re(Wx)/2`, whose
/// integral is the probability of finding the qubit still in that state.
pub fn assemble_ws_from(
    p: &SystemParams,
    mode: Mode,
    t: f64,
    coeffs: &CoeffState,
    spec: &GridSpec,
) -> Result<WignerGrid> {
    if spec.n_gamma < 2 || spec.n_n < 2 {
        return Err(Error::Parameter("grid needs at least two points per axis".into()));
    }
    let wp = evolve_diagonal(p, Branch::Plus, mode, t);
    let wm = evolve_diagonal(p, Branch::Minus, mode, t);
    let needed = covering_window(&[wp, wm], 5.0);
    let (g0, g1, n0, n1) = match spec.window {
        None => needed,
        Some(w) => {
            let tol = 1e-12 * (needed.1 - needed.0).abs().max((needed.3 - needed.2).abs());
            if w.0 > needed.0 + tol || w.1 < needed.1 - tol || w.2 > needed.2 + tol || w.3 < needed.3 - tol {
                return Err(Error::Coverage(format!(
                    "window must include gamma in [{:.6e}, {:.6e}] and N in [{:.6e}, {:.6e}]",
                    needed.0, needed.1, needed.2, needed.3
                )));
            }
            w
        }
    };
    let gamma_axis = axis(g0, g1, spec.n_gamma);
    let n_axis = axis(n0, n1, spec.n_n);
    let values: Vec<f64> = gamma_axis
        .par_iter()
        .flat_map_iter(|&g| {
            n_axis.iter().map(move |&n| {
                0.25 * (wp.density(g, n) + wm.density(g, n)) + 0.5 * eval_offdiag(coeffs, g, n).re
            })
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integrability { t, what: "non-finite surface value".into() });
    }
    Ok(WignerGrid { gamma_axis, n_axis, values, t })
}

/// Integrates the coefficients to `t` and assembles the surface.
pub fn assemble_ws(p: &SystemParams, mode: Mode, t: f64, spec: &GridSpec, tol: &Tolerances) -> Result<WignerGrid> {
    let grid = if t == 0.0 { vec![0.0] } else { vec![0.0, t] };
    let states = coeffode::integrate(p, mode, &grid, tol)?;
    assemble_ws_from(p, mode, t, states.last().expect("non-empty grid"), spec)
}

fn trapezoid(values: impl Iterator<Item = f64>, n: usize, h: f64) -> f64 {
    values.enumerate().map(|(i, v)| if i == 0 || i + 1 == n { 0.5 * v } else { v }).sum::<f64>() * h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Gamma,
    Charge,
}

/// Marginal density along `keep`, integrating out the other axis (trapezoid).
pub fn marginal(grid: &WignerGrid, keep: Axis) -> Vec<f64> {
    let (ng, nn) = (grid.gamma_axis.len(), grid.n_axis.len());
    let hg = grid.gamma_axis[1] - grid.gamma_axis[0];
    let hn = grid.n_axis[1] - grid.n_axis[0];
    match keep {
        Axis::Gamma => (0..ng).map(|i| trapezoid((0..nn).map(|j| grid.at(i, j)), nn, hn)).collect(),
        Axis::Charge => (0..nn).map(|j| trapezoid((0..ng).map(|i| grid.at(i, j)), ng, hg)).collect(),
    }
}

/// Two-dimensional trapezoidal integral of the surface.
pub fn grid_integral(grid: &WignerGrid) -> f64 {
    let m = marginal(grid, Axis::Gamma);
    trapezoid(m.into_iter(), grid.gamma_axis.len(), grid.gamma_axis[1] - grid.gamma_axis[0])
}

/// Quadrature of `(W+ + W-)/2` over a window of `+-8` standard deviations.
pub fn diagonal_weight(p: &SystemParams, mode: Mode, t: f64, points: usize) -> f64 {
    let wp = evolve_diagonal(p, Branch::Plus, mode, t);
    let wm = evolve_diagonal(p, Branch::Minus, mode, t);
    let (g0, g1, n0, n1) = covering_window(&[wp, wm], 8.0);
    let ga = axis(g0, g1, points);
    let na = axis(n0, n1, points);
    let (hg, hn) = (ga[1] - ga[0], na[1] - na[0]);
    let rows: Vec<f64> = ga
        .par_iter()
        .map(|&g| trapezoid(na.iter().map(|&n| 0.5 * (wp.density(g, n) + wm.density(g, n))), points, hn))
        .collect();
    trapezoid(rows.into_iter(), points, hg)
}

/// Quadrature of `Wx` over a window of `+-k` widths of `|Wx|` around its peak.
pub fn offdiag_quadrature(s: &CoeffState, k: f64, points: usize) -> Result<C64> {
    let (centre, sd) = offdiag_envelope(s)?;
    let ga = axis(centre.0 - k * sd.0, centre.0 + k * sd.0, points);
    let na = axis(centre.1 - k * sd.1, centre.1 + k * sd.1, points);
    let (hg, hn) = (ga[1] - ga[0], na[1] - na[0]);
    let rows: Vec<C64> = ga
        .par_iter()
        .map(|&g| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, &n) in na.iter().enumerate() {
                let w = if j == 0 || j + 1 == points { 0.5 } else { 1.0 };
                acc += eval_offdiag(s, g, n) * w;
            }
            acc * hn
        })
        .collect();
    Ok(rows
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i + 1 == points { v * 0.5 } else { *v })
        .sum::<C64>()
        * hg)
}

/// Peak location and standard deviations of the envelope `|Wx|`.
pub fn offdiag_envelope(s: &CoeffState) -> Result<((f64, f64), (f64, f64))> {
    // |Wx| = exp(Re exponent); Re exponent = -(1/2) u^T K u + J^T u + const.
    let k11 = -2.0 * s.c.re;
    let k22 = -2.0 * s.e.re;
    let k12 = -s.d.re;
    let det = k11 * k22 - k12 * k12;
    if !(k11 > 0.0 && det > 0.0) {
        return Err(Error::Integrability { t: f64::NAN, what: "envelope is not normalizable".into() });
    }
    let (j1, j2) = (s.a.re, s.b.re);
    let g = (k22 * j1 - k12 * j2) / det;
    let n = (k11 * j2 - k12 * j1) / det;
    Ok(((g, n), ((k22 / det).sqrt(), (k11 / det).sqrt())))
}

/// Number of sign changes of the surface along `N` at fixed `gamma`, sampled on `samples` points.
pub fn sign_changes_along_charge(
    p: &SystemParams,
    mode: Mode,
    t: f64,
    coeffs: &CoeffState,
    gamma: f64,
    n_range: (f64, f64),
    samples: usize,
) -> usize {
    let wp = evolve_diagonal(p, Branch::Plus, mode, t);
    let wm = evolve_diagonal(p, Branch::Minus, mode, t);
    let vals: Vec<f64> = axis(n_range.0, n_range.1, samples)
        .into_iter()
        .map(|n| 0.25 * (wp.density(gamma, n) + wm.density(gamma, n)) + 0.5 * eval_offdiag(coeffs, gamma, n).re)
        .collect();
    vals.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

/// Interference contrast: `max |Re(Wx)/2|` over `max (W+ + W-)/4` on the surface grid.
pub fn fringe_contrast(p: &SystemParams, mode: Mode, t: f64, coeffs: &CoeffState, spec: &GridSpec) -> Result<f64> {
    let grid = assemble_ws_from(p, mode, t, coeffs, spec)?;
    let wp = evolve_diagonal(p, Branch::Plus, mode, t);
    let wm = evolve_diagonal(p, Branch::Minus, mode, t);
    let mut lobe = 0.0f64;
    let mut fringe = 0.0f64;
    for (i, &g) in grid.gamma_axis.iter().enumerate() {
        for (j, &n) in grid.n_axis.iter().enumerate() {
            let d = 0.25 * (wp.density(g, n) + wm.density(g, n));
            lobe = lobe.max(d);
            fringe = fringe.max((grid.at(i, j) - d).abs());
        }
    }
    Ok(fringe / lobe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffode::{initial_coeffs, uniform_grid};
    use approx::assert_relative_eq;

    #[test]
    fn initial_offdiag_values() {
        let p = SystemParams::quantronium();
        let s = initial_coeffs(&p);
        assert_relative_eq!(eval_offdiag(&s, 0.0, 0.0).re, 1.0 / std::f64::consts::PI, max_relative = 1e-15);
        for (g, n) in [(0.1, 3.0), (-0.05, 7.0), (0.2, -1.0)] {
            let v = eval_offdiag(&s, g, n);
            assert!(v.re > 0.0 && v.im == 0.0);
            assert_eq!(v, eval_offdiag(&s, -g, -n));
        }
        assert_relative_eq!(bloch_length(&s), 1.0, max_relative = 1e-14);
        let z = offdiag_integral(&s).unwrap();
        assert_relative_eq!(z.re, 1.0, max_relative = 1e-12);
        assert!(z.im.abs() < 1e-15);
    }

    #[test]
    fn exponent_is_clamped() {
        let mut s = initial_coeffs(&SystemParams::quantronium());
        s.f = C64::new(800.0, 0.0);
        assert!(eval_offdiag(&s, 0.0, 0.0).re.is_finite());
        assert!(offdiag_exponent(&s, 0.0, 0.0).re > EXPONENT_CAP);
    }

    #[test]
    fn pauli_start_and_consistency() {
        let p = SystemParams::quantronium();
        let tol = Tolerances::default();
        let (sx, sy, sz) = pauli_expectations(&p, Mode::Irreversible, 0.0, &tol).unwrap();
        assert_relative_eq!(sx, 1.0, max_relative = 1e-12);
        assert_eq!((sy, sz), (0.0, 0.0));
        let grid = uniform_grid(p.t0 * 0.1, 200);
        let series = bloch_trajectory(&p, Mode::Irreversible, &grid, &tol).unwrap();
        for i in 0..grid.len() {
            let b2 = series.sx[i].powi(2) + series.sy[i].powi(2);
            assert!((b2.sqrt() - series.lengths[i]).abs() < 1e-10 * series.lengths[i].max(1e-300));
            assert!(series.lengths[i] <= 1.0 + 1e-9);
        }
        let (sx, sy, _) = pauli_expectations(&p, Mode::Irreversible, grid[150], &tol).unwrap();
        assert_relative_eq!(sx, series.sx[150], epsilon = 1e-9);
        assert_relative_eq!(sy, series.sy[150], epsilon = 1e-9);
    }

    #[test]
    fn bias_sign_symmetry() {
        let p = SystemParams::quantronium();
        let grid = uniform_grid(p.t0 * 0.2, 50);
        for mode in [Mode::Reversible, Mode::Irreversible] {
            let a = bloch_trajectory(&p, mode, &grid, &Tolerances::default()).unwrap();
            let b = bloch_trajectory(&p.with_bias(-p.bias), mode, &grid, &Tolerances::default()).unwrap();
            for (x, y) in a.lengths.iter().zip(&b.lengths) {
                assert!((x - y).abs() <= 1e-9 * x.max(1e-300));
            }
        }
    }

    #[test]
    fn quadrature_matches_closed_form_integral() {
        let p = SystemParams::quantronium();
        let grid = uniform_grid(p.t0 * 0.05, 5);
        let states = coeffode::integrate(&p, Mode::Irreversible, &grid, &Tolerances::default()).unwrap();
        let series = bloch_series(&grid, &states).unwrap();
        for (i, s) in states.iter().enumerate() {
            let q = offdiag_quadrature(s, 9.0, 801).unwrap();
            let closed = C64::new(series.sx[i], series.sy[i]);
            assert!((q - closed).norm() < 1e-5, "i={i} {q} vs {closed}");
        }
    }

    #[test]
    fn initial_surface_integrates_to_one() {
        let p = SystemParams::quantronium();
        let g = assemble_ws(&p, Mode::Reversible, 0.0, &GridSpec::default(), &Tolerances::default()).unwrap();
        // +-5 sigma truncation leaves ~ 1e-6 outside.
        assert_relative_eq!(grid_integral(&g), 1.0, epsilon = 2e-6);
        let m = marginal(&g, Axis::Gamma);
        let hg = g.gamma_axis[1] - g.gamma_axis[0];
        // Marginal in gamma: N(0, lambda/2) at the centre row.
        let centre = m[m.len() / 2];
        let expect = 1.0 / (std::f64::consts::PI * p.lambda_cross).sqrt();
        assert_relative_eq!(centre, expect, max_relative = 1e-5);
        let total: f64 = trapezoid(m.iter().copied(), m.len(), hg);
        assert_relative_eq!(total, grid_integral(&g), max_relative = 1e-14);
    }

    #[test]
    fn coverage_is_enforced() {
        let p = SystemParams::quantronium();
        let spec = GridSpec { n_gamma: 11, n_n: 11, window: Some((-0.01, 0.01, -1.0, 1.0)) };
        let r = assemble_ws(&p, Mode::Reversible, 0.0, &spec, &Tolerances::default());
        assert!(matches!(r, Err(Error::Coverage(_))));
    }

    #[test]
    fn diagonal_quadrature_unit_weight() {
        let p = SystemParams::quantronium();
        for mode in [Mode::Reversible, Mode::Irreversible] {
            assert_relative_eq!(diagonal_weight(&p, mode, p.t0 * 0.7, 301), 1.0, epsilon = 1e-9);
        }
    }

    /// Coupling for which the fast frequency is exactly `m` times the splitting.
    fn commensurate(m: f64) -> SystemParams {
        let s = 1.0 - 1.0 / m;
        let x = (1.0 - s * s) / (1.0 + s * s);
        let mut i = crate::params::PhysicalInputs::quantronium();
        i.e_j = 4.0 * x * i.e_j0;
        crate::params::build_system(&i).unwrap()
    }

    #[test]
    fn revival_is_periodic_for_commensurate_frequencies() {
        for m in [30.0, 86.0] {
            let p = commensurate(m);
            assert_relative_eq!(p.omega_plus / (p.omega_plus - p.omega_minus), m, max_relative = 1e-10);
            let n = 800;
            let grid = uniform_grid(4.0 * p.t0, n);
            let tol = Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() };
            let b = bloch_trajectory(&p, Mode::Reversible, &grid, &tol).unwrap().lengths;
            let drift = (0..=n / 2).map(|i| (b[i + n / 2] - b[i]).abs()).fold(0.0, f64::max);
            assert!(drift < 1e-6, "m = {m}: drift {drift:e}");
            assert!(b[n / 2] > 1.0 - 1e-6);
        }
    }
}
