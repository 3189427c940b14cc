//! Diagonal Wigner components as evolving Gaussians.
//!
//! Each qubit branch sees a displaced harmonic well. The branch oscillator's
//! complex amplitude `alpha = g / sqrt(2 lambda) + i sqrt(lambda / 2) N` rotates
//! about the displaced centre; in irreversible mode the tunnelling channel adds
//! diffusion along `N`. Means and covariances are propagated in the
//! `(alpha, alpha*)` basis and reported in real `(g, N)` coordinates.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::params::SystemParams;
use crate::{Branch, Mode, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Gaussian in real phase/charge coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean_gamma: f64,
    pub mean_n: f64,
    pub var_gamma: f64,
    pub var_n: f64,
    pub cov_gamma_n: f64,
}

impl GaussianState {
    pub fn det(&self) -> f64 {
        self.var_gamma * self.var_n - self.cov_gamma_n * self.cov_gamma_n
    }

    /// Unit-weight density `exp(-u' S^-1 u / 2) / (2 pi sqrt(det S))`.
    pub fn density(&self, gamma: f64, n: f64) -> f64 {
        let det = self.det();
        let (dg, dn) = (gamma - self.mean_gamma, n - self.mean_n);
        let q = (self.var_n * dg * dg - 2.0 * self.cov_gamma_n * dg * dn + self.var_gamma * dn * dn) / det;
        (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
    }
}

/// Linear Fokker-Planck problem in the `(alpha, alpha*)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FokkerPlanckSpec {
    pub drift: Mat2,
    pub diffusion: Mat2,
    /// Fixed point of the drift, `E_b Gamma / omega`.
    pub displacement: C64,
}

/// Mean and covariance after time `t` for a diagonal drift.
///
/// `cov = e^{Mt} cov0 e^{M^T t} + int_0^t e^{Ms} Q e^{M^T s} ds`, evaluated entrywise.
pub fn wang_uhlenbeck(spec: &FokkerPlanckSpec, mean0: C64, cov0: &Mat2, t: f64) -> Result<(C64, Mat2)> {
    if t < 0.0 {
        return Err(Error::Parameter(format!("time must be non-negative, got {t}")));
    }
    if !spec.drift.is_diagonal() {
        return Err(Error::Parameter("closed-form propagation needs a diagonal drift".into()));
    }
    let m = [spec.drift.0[0][0], spec.drift.0[1][1]];
    let prop = Mat2::diag((m[0] * t).exp(), (m[1] * t).exp());
    let mean = spec.displacement + prop.0[0][0] * (mean0 - spec.displacement);
    let mut cov = prop.mul(cov0).mul(&prop.transpose());
    for i in 0..2 {
        for j in 0..2 {
            let s = m[i] + m[j];
            let weight = if s.norm() * t < 1e-8 {
                // Series of (e^{st} - 1)/s about s = 0.
                C64::new(t, 0.0) * (1.0 + s * t / 2.0 + s * s * t * t / 6.0)
            } else {
                ((s * t).exp() - 1.0) / s
            };
            cov.0[i][j] += spec.diffusion.0[i][j] * weight;
        }
    }
    Ok((mean, cov))
}

/// Drift, diffusion and centre for one branch.
pub fn fokker_planck_spec(p: &SystemParams, branch: Branch, mode: Mode) -> FokkerPlanckSpec {
    let w = p.omega(branch);
    let q = p.quadrature(branch);
    let diffusion = match mode {
        Mode::Reversible => Mat2::ZERO,
        Mode::Irreversible => {
            let r = q * q * p.bias.abs();
            Mat2::new(C64::new(-r, 0.0), C64::new(r, 0.0), C64::new(r, 0.0), C64::new(-r, 0.0))
        }
    };
    FokkerPlanckSpec {
        drift: Mat2::diag(C64::new(0.0, -w), C64::new(0.0, w)),
        diffusion,
        displacement: C64::new(q * p.bias / w, 0.0),
    }
}

/// Unbiased-junction ground state expressed in a branch's `(alpha, alpha*)` basis.
pub fn initial_alpha_cov(p: &SystemParams, branch: Branch) -> Mat2 {
    let (l, lx) = (p.lambda(branch), p.lambda_cross);
    let squeeze = C64::new(lx / (4.0 * l) - l / (4.0 * lx), 0.0);
    let spread = C64::new(lx / (4.0 * l) + l / (4.0 * lx), 0.0);
    Mat2::new(squeeze, spread, spread, squeeze)
}

/// Branch mean and covariance in the `(alpha, alpha*)` basis, by explicit formula.
pub fn evolve_alpha(p: &SystemParams, branch: Branch, mode: Mode, t: f64) -> (C64, Mat2) {
    let w = p.omega(branch);
    let q = p.quadrature(branch);
    let centre = q * p.bias / w;
    let rot = (-I * w * t).exp();
    let mean = centre * (1.0 - rot);
    let c0 = initial_alpha_cov(p, branch);
    let mut c11 = c0.0[0][0] * rot * rot;
    let mut c12 = c0.0[0][1];
    if mode == Mode::Irreversible {
        let r = q * q * p.bias.abs();
        c11 += I * r * (1.0 - rot * rot) / (2.0 * w);
        c12 += r * t;
    }
    (mean, Mat2::new(c11, c12, c12, c11.conj()))
}

/// Branch Gaussian at time `t` in real coordinates.
pub fn evolve_diagonal(p: &SystemParams, branch: Branch, mode: Mode, t: f64) -> GaussianState {
    let (mean, cov) = evolve_alpha(p, branch, mode, t);
    to_phase_charge(mean, &cov, p.lambda(branch))
}

/// Basis change from symmetric-ordered `(alpha, alpha*)` moments to `(g, N)` moments.
///
/// The covariance is already symmetrically ordered, so the vacuum half-quantum
/// is carried inside it and no extra term is added.
pub fn to_phase_charge(alpha_mean: C64, alpha_cov: &Mat2, lambda: f64) -> GaussianState {
    let c11 = alpha_cov.0[0][0];
    let c12 = alpha_cov.0[0][1].re;
    GaussianState {
        mean_gamma: (2.0 * lambda).sqrt() * alpha_mean.re,
        mean_n: (2.0 / lambda).sqrt() * alpha_mean.im,
        var_gamma: lambda * (c11.re + c12),
        var_n: (c12 - c11.re) / lambda,
        cov_gamma_n: c11.im,
    }
}

/// Inverse of [`to_phase_charge`].
pub fn from_phase_charge(s: &GaussianState, lambda: f64) -> (C64, Mat2) {
    let mean = C64::new(s.mean_gamma / (2.0 * lambda).sqrt(), s.mean_n * (lambda / 2.0).sqrt());
    let re11 = 0.5 * (s.var_gamma / lambda - lambda * s.var_n);
    let c12 = 0.5 * (s.var_gamma / lambda + lambda * s.var_n);
    let c11 = C64::new(re11, s.cov_gamma_n);
    (mean, Mat2::new(c11, C64::new(c12, 0.0), C64::new(c12, 0.0), c11.conj()))
}

/// Centre of the branch orbit in real coordinates, `(lambda E_b / omega, 0)`.
pub fn orbit_centre(p: &SystemParams, branch: Branch) -> (f64, f64) {
    (p.lambda(branch) * p.bias / p.omega(branch), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, Tolerances};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn device() -> SystemParams {
        SystemParams::quantronium()
    }

    #[test]
    fn identity_without_drift_or_diffusion() {
        let spec = FokkerPlanckSpec { drift: Mat2::ZERO, diffusion: Mat2::ZERO, displacement: C64::new(0.3, 0.0) };
        let cov0 = Mat2::new(C64::new(0.1, 0.2), C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.1, -0.2));
        let (m, c) = wang_uhlenbeck(&spec, C64::new(1.0, -2.0), &cov0, 3.7).unwrap();
        assert_eq!(m, C64::new(1.0, -2.0));
        assert!(c.max_abs_diff(&cov0) < 1e-15);
    }

    #[test]
    fn reversible_returns_after_one_period() {
        let p = device();
        for b in [Branch::Plus, Branch::Minus] {
            let spec = fokker_planck_spec(&p, b, Mode::Reversible);
            let cov0 = initial_alpha_cov(&p, b);
            let period = 2.0 * std::f64::consts::PI / p.omega(b);
            let (m, c) = wang_uhlenbeck(&spec, C64::new(0.0, 0.0), &cov0, period).unwrap();
            assert!(m.norm() < 1e-12 * spec.displacement.norm().max(1.0));
            assert!(c.max_abs_diff(&cov0) < 1e-12);
        }
    }

    #[test]
    fn generic_and_explicit_propagation_agree() {
        let p = device();
        for b in [Branch::Plus, Branch::Minus] {
            for mode in [Mode::Reversible, Mode::Irreversible] {
                let spec = fokker_planck_spec(&p, b, mode);
                for k in 0..7 {
                    let t = p.t0 * k as f64 / 3.0;
                    let (m1, c1) = wang_uhlenbeck(&spec, C64::new(0.0, 0.0), &initial_alpha_cov(&p, b), t).unwrap();
                    let (m2, c2) = evolve_alpha(&p, b, mode, t);
                    let scale = c2.0[0][1].norm();
                    assert!((m1 - m2).norm() < 1e-10 * m2.norm().max(1.0));
                    assert!(c1.max_abs_diff(&c2) < 1e-10 * scale);
                }
            }
        }
    }

    #[test]
    fn vacuum_start_in_real_coordinates() {
        let p = device();
        for b in [Branch::Plus, Branch::Minus] {
            let g = evolve_diagonal(&p, b, Mode::Irreversible, 0.0);
            assert_relative_eq!(g.var_gamma, p.lambda_cross / 2.0, max_relative = 1e-12);
            assert_relative_eq!(g.var_n, 1.0 / (2.0 * p.lambda_cross), max_relative = 1e-12);
            assert!(g.cov_gamma_n.abs() < 1e-15);
            assert_eq!((g.mean_gamma, g.mean_n), (0.0, 0.0));
        }
        // Weak coupling limit of the alpha-basis covariance.
        let mut i = crate::params::PhysicalInputs::quantronium();
        i.e_j = 1e-9;
        let q = crate::params::build_system(&i).unwrap();
        let c = initial_alpha_cov(&q, Branch::Plus);
        assert!(c.0[0][0].norm() < 1e-9);
        assert_relative_eq!(c.0[0][1].re, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn circular_orbit_about_centre() {
        let p = device();
        for b in [Branch::Plus, Branch::Minus] {
            let spec = fokker_planck_spec(&p, b, Mode::Reversible);
            let r0 = spec.displacement.norm();
            for k in 0..50 {
                let (m, _) = evolve_alpha(&p, b, Mode::Reversible, p.t0 * k as f64 / 17.0);
                assert_relative_eq!((m - spec.displacement).norm(), r0, max_relative = 1e-12);
            }
            let g = evolve_diagonal(&p, b, Mode::Reversible, std::f64::consts::PI / p.omega(b));
            assert_relative_eq!(g.mean_gamma, 2.0 * orbit_centre(&p, b).0, max_relative = 1e-12);
        }
    }

    #[test]
    fn purity_and_diffusion() {
        let p = device();
        for b in [Branch::Plus, Branch::Minus] {
            let mut prev = 0.0;
            for k in 0..40 {
                let t = p.t0 * k as f64 / 13.0;
                let r = evolve_diagonal(&p, b, Mode::Reversible, t);
                let i = evolve_diagonal(&p, b, Mode::Irreversible, t);
                assert_relative_eq!(r.det(), 0.25, max_relative = 1e-9);
                assert!(i.det() >= prev - 1e-12);
                prev = i.det();
                assert_eq!((r.mean_gamma, r.mean_n), (i.mean_gamma, i.mean_n));
                if k > 0 {
                    assert!(i.var_gamma > r.var_gamma && i.var_n > r.var_n);
                }
            }
        }
    }

    #[test]
    fn real_coordinate_moment_equations_agree() {
        // Independent route: integrate the moment ODEs of the linear SDE
        //   dg = w l N dt,  dN = (-(w/l) g + E_b) dt + sqrt|E_b| dW.
        let p = device();
        for b in [Branch::Plus, Branch::Minus] {
            let (w, l) = (p.omega(b), p.lambda(b));
            let eb = p.bias;
            let rhs = |_: f64, y: &[C64], dy: &mut [C64]| {
                let (mg, mn, vg, vn, cv) = (y[0], y[1], y[2], y[3], y[4]);
                dy[0] = mn * (w * l);
                dy[1] = -mg * (w / l) + eb;
                dy[2] = cv * (2.0 * w * l);
                dy[3] = -cv * (2.0 * w / l) + eb.abs();
                dy[4] = vn * (w * l) - vg * (w / l);
            };
            let y0 = [0.0, 0.0, p.lambda_cross / 2.0, 0.5 / p.lambda_cross, 0.0].map(|x| C64::new(x, 0.0));
            let ts: Vec<f64> = (0..=8).map(|k| p.t0 * k as f64 / 8.0).collect();
            let tol = Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() };
            let sol = integrate(rhs, &y0, &ts, &tol).unwrap();
            for (t, y) in ts.iter().zip(&sol) {
                let g = evolve_diagonal(&p, b, Mode::Irreversible, *t);
                assert_relative_eq!(g.mean_gamma, y[0].re, epsilon = 1e-8, max_relative = 1e-8);
                assert_relative_eq!(g.var_gamma, y[2].re, max_relative = 1e-8);
                assert_relative_eq!(g.var_n, y[3].re, max_relative = 1e-8);
                assert!((g.cov_gamma_n - y[4].re).abs() < 1e-8 * (g.var_gamma * g.var_n).sqrt());
            }
        }
    }

    #[test]
    fn density_is_normalized_shape() {
        let s = GaussianState { mean_gamma: 0.0, mean_n: 0.0, var_gamma: 1.0, var_n: 1.0, cov_gamma_n: 0.0 };
        assert_relative_eq!(s.density(0.0, 0.0), 1.0 / (2.0 * std::f64::consts::PI), max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn basis_change_round_trip(
            mg in -5.0f64..5.0, mn in -50.0f64..50.0,
            vg in 0.01f64..2.0, vn in 0.5f64..80.0, rho in -0.95f64..0.95,
            lambda in 0.005f64..0.5,
        ) {
            let s = GaussianState { mean_gamma: mg, mean_n: mn, var_gamma: vg, var_n: vn,
                cov_gamma_n: rho * (vg * vn).sqrt() };
            let (m, c) = from_phase_charge(&s, lambda);
            let back = to_phase_charge(m, &c, lambda);
            prop_assert!((back.mean_gamma - mg).abs() < 1e-12 * (1.0 + mg.abs()));
            prop_assert!((back.mean_n - mn).abs() < 1e-12 * (1.0 + mn.abs()));
            prop_assert!((back.var_gamma - vg).abs() < 1e-12 * vg.max(1.0) * (1.0 + vn * lambda * lambda / vg));
            prop_assert!((back.var_n - vn).abs() < 1e-12 * vn.max(1.0) * (1.0 + vg / (lambda * lambda * vn)));
            prop_assert!((back.cov_gamma_n - s.cov_gamma_n).abs() < 1e-10 * (vg * vn).sqrt());
        }

        #[test]
        fn pure_real_amplitude_has_no_charge_offset(re in -10.0f64..10.0, lambda in 0.001f64..1.0) {
            let s = to_phase_charge(C64::new(re, 0.0), &Mat2::new(
                C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.0)), lambda);
            prop_assert_eq!(s.mean_n, 0.0);
            prop_assert!((s.var_gamma - lambda / 2.0).abs() < 1e-15);
        }
    }
}
