//! Adaptive Dormand-Prince 5(4) stepper for complex-valued ODE systems.
//!
//! Output is produced exactly at the requested times: the step is clipped to
//! land on every sample, so no interpolant is involved.

use crate::error::{Error, Result};
use crate::C64;

/// Step-size control settings. The error norm counts real and imaginary parts
/// as separate components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 5_000_000 }
    }
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t_grid[0]` and returns the state at every grid time.
pub fn integrate<F>(f: F, y0: &[C64], t_grid: &[f64], tol: &Tolerances) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    integrate_guarded(f, |_, _| Ok(()), y0, t_grid, tol)
}

/// As [`integrate`], calling `guard` after each accepted step; an error aborts.
pub fn integrate_guarded<F, G>(
    mut f: F,
    mut guard: G,
    y0: &[C64],
    t_grid: &[f64],
    tol: &Tolerances,
) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    G: FnMut(f64, &[C64]) -> Result<()>,
{
    let n = y0.len();
    let Some(&t_start) = t_grid.first() else {
        return Ok(Vec::new());
    };
    if t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Integrator { t: t_start, what: "time grid must be ascending".into() });
    }

    let mut out = Vec::with_capacity(t_grid.len());
    let mut y = y0.to_vec();
    let mut t = t_start;
    out.push(y.clone());

    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    f(t, &y, &mut k[0]);

    let span = t_grid[t_grid.len() - 1] - t_start;
    let mut h = initial_step(&y, &k[0], tol, span);
    let mut steps = 0usize;

    for &target in &t_grid[1..] {
        while t < target {
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::Integrator { t, what: "step budget exhausted".into() });
            }
            let last = target - t <= h * (1.0 + 1e-12);
            let step = if last { target - t } else { h };

            let stage = |tmp: &mut [C64], coeffs: &[f64], k: &[Vec<C64>]| {
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, &c) in coeffs.iter().enumerate() {
                        if c != 0.0 {
                            acc += k[j][i] * c;
                        }
                    }
                    tmp[i] = y[i] + acc * step;
                }
            };
            stage(&mut tmp, &[A21], &k);
            f(t + C2 * step, &tmp, &mut k[1]);
            stage(&mut tmp, &[A31, A32], &k);
            f(t + C3 * step, &tmp, &mut k[2]);
            stage(&mut tmp, &[A41, A42, A43], &k);
            f(t + C4 * step, &tmp, &mut k[3]);
            stage(&mut tmp, &[A51, A52, A53, A54], &k);
            f(t + C5 * step, &tmp, &mut k[4]);
            stage(&mut tmp, &[A61, A62, A63, A64, A65], &k);
            f(t + step, &tmp, &mut k[5]);
            stage(&mut y_new, &[B1, 0.0, B3, B4, B5, B6], &k);
            f(t + step, &y_new, &mut k[6]);

            let mut err_sq = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6
                    + k[6][i] * E7)
                    * step;
                let sre = tol.atol + tol.rtol * y[i].re.abs().max(y_new[i].re.abs());
                let sim = tol.atol + tol.rtol * y[i].im.abs().max(y_new[i].im.abs());
                err_sq += (e.re / sre).powi(2) + (e.im / sim).powi(2);
            }
            let err = (err_sq / (2 * n) as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integrator { t, what: "non-finite state".into() });
            }

            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                guard(t, &y)?;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    h = step * fac;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
            if h <= f64::EPSILON * t.abs().max(span) {
                return Err(Error::Integrator { t, what: "step size underflow".into() });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step(y: &[C64], dy: &[C64], tol: &Tolerances, span: f64) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for (v, dv) in y.iter().zip(dy) {
        let s = tol.atol + tol.rtol * v.norm();
        d0 = d0.max(v.norm() / s);
        d1 = d1.max(dv.norm() / s);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-300) } else { 0.01 * d0 / d1 };
    h.min(span.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_rotation_is_exact_to_tolerance() {
        // y' = i w y
        let w = 3.0;
        let ts: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let sol = integrate(
            |_, y, dy| dy[0] = C64::new(0.0, w) * y[0],
            &[C64::new(1.0, 0.0)],
            &ts,
            &Tolerances::default(),
        )
        .unwrap();
        for (t, y) in ts.iter().zip(&sol) {
            let exact = C64::new(0.0, w * t).exp();
            assert!((y[0] - exact).norm() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn riccati_blowup_is_reported() {
        // y' = y^2, y(0) = 1 diverges at t = 1.
        let r = integrate(
            |_, y, dy| dy[0] = y[0] * y[0],
            &[C64::new(1.0, 0.0)],
            &[0.0, 2.0],
            &Tolerances { max_steps: 100_000, ..Tolerances::default() },
        );
        assert!(r.is_err());
    }

    #[test]
    fn guard_aborts() {
        let r = integrate_guarded(
            |_, _, dy| dy[0] = C64::new(1.0, 0.0),
            |t, _| if t > 0.5 { Err(Error::Integrator { t, what: "stop".into() }) } else { Ok(()) },
            &[C64::new(0.0, 0.0)],
            &[0.0, 1.0],
            &Tolerances::default(),
        );
        assert!(r.is_err());
    }
}
