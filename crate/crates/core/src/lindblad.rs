//! Truncated charge-basis master equation for a single current-biased junction.
//!
//! The bias enters only through the jump operator `L = eta^dag` (one Cooper
//! pair tunnels in) at rate `|E_b|`; the Josephson term `cos g` is
//! `(eta + eta^dag)/2` in the charge basis. No expansion in the phase is made,
//! which makes this the reference for the classical-limit current identity.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Dense density matrix on charge states `n = -n_max ..= n_max` (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub n_max: usize,
    pub matrix: Vec<C64>,
}

impl DenseState {
    pub fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[i * self.dim() + j]
    }

    /// Pure state from charge amplitudes (normalized here).
    pub fn pure(n_max: usize, amps: &[C64]) -> Self {
        let dim = 2 * n_max + 1;
        assert_eq!(amps.len(), dim);
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<C64> = amps.iter().map(|a| a / norm).collect();
        let mut matrix = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                matrix[i * dim + j] = v[i] * v[j].conj();
            }
        }
        Self { n_max, matrix }
    }

    /// Number state `|n>`.
    pub fn number_state(n_max: usize, n: i64) -> Self {
        let dim = 2 * n_max + 1;
        let mut amps = vec![ZERO; dim];
        amps[(n + n_max as i64) as usize] = C64::new(1.0, 0.0);
        Self::pure(n_max, &amps)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `max |rho - rho^dag|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for i in 0..d {
            for j in i..d {
                m = m.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        m
    }

    /// Largest population on the outermost `width` states at either edge.
    pub fn edge_population(&self, width: usize) -> f64 {
        let d = self.dim();
        (0..width.min(d)).flat_map(|k| [self.get(k, k).re, self.get(d - 1 - k, d - 1 - k).re]).fold(0.0, f64::max)
    }

    pub fn mean_charge(&self) -> f64 {
        let n0 = self.n_max as f64;
        (0..self.dim()).map(|i| (i as f64 - n0) * self.get(i, i).re).sum()
    }

    /// Whether all eigenvalues exceed `-tol`, via Cholesky of `rho + tol I`.
    pub fn is_positive(&self, tol: f64) -> bool {
        let d = self.dim();
        let mut l = vec![ZERO; d * d];
        for j in 0..d {
            let mut diag = self.get(j, j).re + tol;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if diag <= 0.0 {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * d + j] = C64::new(ljj, 0.0);
            for i in j + 1..d {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = s / ljj;
            }
        }
        true
    }
}

/// Charge-basis operators of the junction: `H = E_C0 N^2 + E_J0 (1 - (eta + eta^dag)/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionOps {
    pub n_max: usize,
    /// Diagonal of the number operator.
    pub number: Vec<f64>,
    /// Diagonal of `H`.
    pub h_diag: Vec<f64>,
    /// Nearest-neighbour element of `H`, `-E_J0/2`.
    pub h_hop: f64,
    pub e_j0: f64,
}

pub fn build_operators(n_max: usize, e_c0: f64, e_j0: f64) -> Result<JunctionOps> {
    if n_max < 2 {
        return Err(Error::Parameter(format!("charge window n_max = {n_max} < 2")));
    }
    let number: Vec<f64> = (0..=2 * n_max).map(|i| i as f64 - n_max as f64).collect();
    let h_diag = number.iter().map(|n| e_c0 * n * n + e_j0).collect();
    Ok(JunctionOps { n_max, number, h_diag, h_hop: -e_j0 / 2.0, e_j0 })
}

impl JunctionOps {
    pub fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    fn dense(&self, f: impl Fn(usize, usize) -> C64) -> Vec<C64> {
        let d = self.dim();
        (0..d * d).map(|k| f(k / d, k % d)).collect()
    }

    /// `eta |n> = |n-1>`, annihilating at the lower edge.
    pub fn eta(&self) -> Vec<C64> {
        self.dense(|i, j| if i + 1 == j { C64::new(1.0, 0.0) } else { ZERO })
    }

    /// `eta^dag |n> = |n+1>`, annihilating at the upper edge.
    pub fn eta_dag(&self) -> Vec<C64> {
        self.dense(|i, j| if j + 1 == i { C64::new(1.0, 0.0) } else { ZERO })
    }

    pub fn number_op(&self) -> Vec<C64> {
        self.dense(|i, j| if i == j { C64::new(self.number[i], 0.0) } else { ZERO })
    }

    pub fn hamiltonian(&self) -> Vec<C64> {
        self.dense(|i, j| {
            if i == j {
                C64::new(self.h_diag[i], 0.0)
            } else if i.abs_diff(j) == 1 {
                C64::new(self.h_hop, 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Current operator `I_C (eta^dag - eta) / (2i)` (in units of `I_C`).
    pub fn current_op(&self) -> Vec<C64> {
        let (ed, e) = (self.eta_dag(), self.eta());
        ed.iter().zip(&e).map(|(a, b)| (a - b) / C64::new(0.0, 2.0)).collect()
    }

    /// Upper bound on the spectral radius of `H`.
    pub fn h_norm(&self) -> f64 {
        self.h_diag.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 2.0 * self.h_hop.abs()
    }

    /// Phase operator with spectrum in `(-pi, pi]`: `<n|g|m> = i (-1)^(n-m) / (n - m)`.
    pub fn phase_op(&self) -> Vec<C64> {
        self.dense(|i, j| {
            if i == j {
                ZERO
            } else {
                let k = i as f64 - j as f64;
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                C64::new(0.0, sign / k)
            }
        })
    }
}

/// Dense matrix product.
pub fn matmul(a: &[C64], b: &[C64], d: usize) -> Vec<C64> {
    let mut out = vec![ZERO; d * d];
    out.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..d {
                row[j] += aik * b[k * d + j];
            }
        }
    });
    out
}

/// `-i[H, rho] + |E_b| (L rho L^dag - rho)`, `L = eta^dag` for `E_b >= 0` and `eta` otherwise.
pub fn rhs(rho: &DenseState, ops: &JunctionOps, bias: f64) -> DenseState {
    let mut out = vec![ZERO; rho.matrix.len()];
    rhs_into(&rho.matrix, ops, bias, &mut out);
    DenseState { n_max: rho.n_max, matrix: out }
}

fn rhs_into(r: &[C64], ops: &JunctionOps, bias: f64, out: &mut [C64]) {
    let d = ops.dim();
    let hop = ops.h_hop;
    let rate = bias.abs();
    let up = bias >= 0.0;
    let minus_i = C64::new(0.0, -1.0);
    out.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        let hi = ops.h_diag[i];
        for j in 0..d {
            let rij = r[i * d + j];
            // (H rho)_ij
            let mut hr = rij * hi;
            if i > 0 {
                hr += r[(i - 1) * d + j] * hop;
            }
            if i + 1 < d {
                hr += r[(i + 1) * d + j] * hop;
            }
            // (rho H)_ij
            let mut rh = rij * ops.h_diag[j];
            if j > 0 {
                rh += r[i * d + j - 1] * hop;
            }
            if j + 1 < d {
                rh += r[i * d + j + 1] * hop;
            }
            let jump = if up {
                if i > 0 && j > 0 {
                    r[(i - 1) * d + j - 1]
                } else {
                    ZERO
                }
            } else if i + 1 < d && j + 1 < d {
                r[(i + 1) * d + j + 1]
            } else {
                ZERO
            };
            row[j] = minus_i * (hr - rh) + (jump - rij) * rate;
        }
    });
}

/// Fixed-step RK4 from `rho0` to `t_final`, calling `observe(t, rho)` at every step (including `t = 0`).
pub fn evolve_observed(
    rho0: &DenseState,
    ops: &JunctionOps,
    bias: f64,
    t_final: f64,
    dt: f64,
    mut observe: impl FnMut(f64, &DenseState),
) -> Result<DenseState> {
    if rho0.n_max != ops.n_max {
        return Err(Error::Parameter("state and operators use different windows".into()));
    }
    if !(dt > 0.0) || dt * (ops.h_norm() + bias.abs()) >= 0.1 {
        return Err(Error::Parameter(format!(
            "time step {dt:e} violates dt (|H| + |E_b|) < 0.1 (|H| = {:e})",
            ops.h_norm()
        )));
    }
    let steps = (t_final / dt).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };
    let n = rho0.matrix.len();
    let mut rho = rho0.clone();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    let mut tmp = vec![ZERO; n];
    observe(0.0, &rho);
    for s in 0..steps {
        let r = &rho.matrix;
        rhs_into(r, ops, bias, &mut k1);
        axpy(&mut tmp, r, &k1, h / 2.0);
        rhs_into(&tmp, ops, bias, &mut k2);
        axpy(&mut tmp, r, &k2, h / 2.0);
        rhs_into(&tmp, ops, bias, &mut k3);
        axpy(&mut tmp, r, &k3, h);
        rhs_into(&tmp, ops, bias, &mut k4);
        let w = h / 6.0;
        rho.matrix
            .par_iter_mut()
            .enumerate()
            .for_each(|(k, v)| *v += (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]) * w);
        observe((s + 1) as f64 * h, &rho);
    }
    if !rho.is_positive(1e-6) {
        return Err(Error::Truncation(format!(
            "state lost positivity beyond 1e-6; enlarge n_max (edge population {:e})",
            rho.edge_population(2)
        )));
    }
    Ok(rho)
}

pub fn evolve(rho0: &DenseState, ops: &JunctionOps, bias: f64, t_final: f64, dt: f64) -> Result<DenseState> {
    evolve_observed(rho0, ops, bias, t_final, dt, |_, _| {})
}

fn axpy(out: &mut [C64], x: &[C64], y: &[C64], a: f64) {
    out.par_iter_mut().enumerate().for_each(|(k, o)| *o = x[k] + y[k] * a);
}

/// `I_C <(eta^dag - eta)/(2i)> = I_C Im(sum_k rho_{k,k+1})`.
pub fn current_expectation(rho: &DenseState, critical_current: f64) -> f64 {
    let d = rho.dim();
    let s: C64 = (0..d - 1).map(|k| rho.get(k, k + 1)).sum();
    critical_current * s.im
}

/// Pure state localized in phase around `gamma0` with phase variance of order `width`:
/// amplitudes `exp(-n^2 width) exp(-i n gamma0)`.
pub fn phase_localized_state(n_max: usize, gamma0: f64, width: f64) -> DenseState {
    let amps: Vec<C64> = (0..=2 * n_max)
        .map(|i| {
            let n = i as f64 - n_max as f64;
            C64::from_polar((-n * n * width).exp(), -n * gamma0)
        })
        .collect();
    DenseState::pure(n_max, &amps)
}

/// Exact jump term `e^{ig} rho e^{-ig} - rho` (charge shift by one).
pub fn dissipator_exact(rho: &DenseState) -> Vec<C64> {
    let d = rho.dim();
    (0..d * d)
        .map(|k| {
            let (i, j) = (k / d, k % d);
            let shifted = if i > 0 && j > 0 { rho.get(i - 1, j - 1) } else { ZERO };
            shifted - rho.get(i, j)
        })
        .collect()
}

/// Second-order phase expansion `i[g, rho] - [g, [g, rho]]/2` of the same term.
pub fn dissipator_second_order(rho: &DenseState, ops: &JunctionOps) -> Vec<C64> {
    let d = rho.dim();
    let g = ops.phase_op();
    let comm = |x: &[C64]| -> Vec<C64> {
        let a = matmul(&g, x, d);
        let b = matmul(x, &g, d);
        a.iter().zip(&b).map(|(p, q)| p - q).collect()
    };
    let c1 = comm(&rho.matrix);
    let c2 = comm(&c1);
    c1.iter().zip(&c2).map(|(a, b)| C64::new(0.0, 1.0) * a - b * 0.5).collect()
}

/// Settings for one classical-limit run, in units where `E_J0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalLimitRun {
    /// `E_C0 / E_J0`.
    pub nu: f64,
    /// `E_b / E_J0`, below 1 so a well exists.
    pub bias_ratio: f64,
    /// Averaging window in plasma periods.
    pub periods: f64,
    pub n_max: usize,
    /// RK4 step as a fraction of `1 / |generator|`.
    pub step_fraction: f64,
}

impl ClassicalLimitRun {
    /// Default protocol: half the critical bias, one plasma period, a window wide
    /// enough for the ground-state spread plus the charge diffusion of the window.
    pub fn protocol(nu: f64) -> Self {
        let n_max = ((9.0 * nu.powf(-0.25)).ceil() as usize).max(40);
        Self { nu, bias_ratio: 0.5, periods: 1.0, n_max, step_fraction: 0.05 }
    }
}

/// Outcome of a classical-limit run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalLimitReport {
    pub run: ClassicalLimitRun,
    pub steps: usize,
    /// Time-averaged `<I> / I_C`.
    pub mean_current: f64,
    /// `|<I>_avg - I_bias| / I_bias`.
    pub relative_error: f64,
    /// Same error predicted from the charge balance `d<N>/dt = |E_b| - E_J0 <sin g>`.
    pub balance_error: f64,
    pub final_trace: f64,
    pub edge_population: f64,
}

/// Runs the full master equation from a phase state at the bottom of the tilted well.
pub fn classical_limit(run: &ClassicalLimitRun) -> Result<ClassicalLimitReport> {
    if !(run.bias_ratio.abs() < 1.0) {
        return Err(Error::Parameter("bias must stay below the critical current".into()));
    }
    let e_j0 = 1.0;
    let e_c0 = run.nu * e_j0;
    let bias = run.bias_ratio * e_j0;
    let ops = build_operators(run.n_max, e_c0, e_j0)?;
    let gamma0 = run.bias_ratio.asin();
    let plasma = (2.0 * e_c0 * e_j0 * gamma0.cos()).sqrt();
    let width = 0.5 * (2.0 * run.nu / gamma0.cos()).sqrt();
    let rho0 = phase_localized_state(run.n_max, gamma0, width);
    let t_final = run.periods * 2.0 * std::f64::consts::PI / plasma;
    let scale = e_c0 * (run.n_max * run.n_max) as f64 + 2.0 * e_j0 + bias.abs();
    let dt = run.step_fraction / scale;
    let steps = (t_final / dt).ceil() as usize;
    let h = t_final / steps as f64;

    let mut acc = 0.0;
    let mut last: Option<f64> = None;
    let n_start = rho0.mean_charge();
    let rho = evolve_observed(&rho0, &ops, bias, t_final, dt, |_, r| {
        let v = current_expectation(r, 1.0);
        if let Some(p) = last {
            acc += 0.5 * (p + v) * h;
        }
        last = Some(v);
    })?;
    let mean_current = acc / t_final;
    let target = run.bias_ratio;
    let drift = rho.mean_charge() - n_start;
    Ok(ClassicalLimitReport {
        run: *run,
        steps,
        mean_current,
        relative_error: (mean_current - target).abs() / target.abs(),
        balance_error: drift.abs() / (bias.abs() * t_final),
        final_trace: rho.trace().re,
        edge_population: rho.edge_population(3),
    })
}

/// Runs several classical-limit protocols in parallel, preserving order.
pub fn classical_limit_ladder(runs: &[ClassicalLimitRun]) -> Result<Vec<ClassicalLimitReport>> {
    runs.par_iter().map(classical_limit).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn commutator_action(a: &[C64], b: &[C64], v: &[C64], d: usize) -> Vec<C64> {
        let ab = matmul(a, b, d);
        let ba = matmul(b, a, d);
        (0..d).map(|i| (0..d).map(|k| (ab[i * d + k] - ba[i * d + k]) * v[k]).sum()).collect()
    }

    #[test]
    fn shift_commutators_on_interior() {
        let ops = build_operators(2, 0.3, 1.0).unwrap();
        let d = ops.dim();
        let (n, ed, e) = (ops.number_op(), ops.eta_dag(), ops.eta());
        for k in 1..d - 1 {
            let mut v = vec![ZERO; d];
            v[k] = C64::new(1.0, 0.0);
            let lhs = commutator_action(&n, &ed, &v, d);
            let rhs: Vec<C64> = (0..d).map(|i| (0..d).map(|j| ed[i * d + j] * v[j]).sum()).collect();
            assert_eq!(lhs, rhs);
            let lhs = commutator_action(&n, &e, &v, d);
            let rhs: Vec<C64> = (0..d).map(|i| (0..d).map(|j| -e[i * d + j] * v[j]).sum()).collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn free_charging_hamiltonian_is_diagonal() {
        let ops = build_operators(3, 0.7, 0.0).unwrap();
        let h = ops.hamiltonian();
        let d = ops.dim();
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 0.7 * ops.number[i].powi(2) } else { 0.0 };
                assert_relative_eq!(h[i * d + j].re, expect, max_relative = 1e-15);
            }
        }
        let c = ops.current_op();
        for i in 0..d {
            for j in 0..d {
                assert_eq!(c[i * d + j], c[j * d + i].conj());
            }
        }
    }

    #[test]
    fn stationary_number_state_without_bias() {
        let ops = build_operators(4, 0.5, 0.0).unwrap();
        let rho = DenseState::number_state(4, 1);
        assert!(rhs(&rho, &ops, 0.0).matrix.iter().all(|v| v.norm() == 0.0));
        assert_eq!(current_expectation(&rho, 1.0), 0.0);
    }

    #[test]
    fn trace_preserved_away_from_edges() {
        let ops = build_operators(40, 0.01, 1.0).unwrap();
        let rho = phase_localized_state(40, 0.5, 0.1);
        assert!(rho.edge_population(1) < 1e-10);
        let tr: C64 = {
            let dr = rhs(&rho, &ops, 0.4);
            dr.trace()
        };
        assert!(tr.norm() < 1e-8);
    }

    #[test]
    fn jump_channel_pumps_charge_at_bias_rate() {
        let ops = build_operators(30, 0.0, 0.0).unwrap();
        let rho = phase_localized_state(30, 0.0, 0.05);
        let h = 1e-4;
        let out = evolve(&rho, &ops, 0.7, h, h / 4.0).unwrap();
        let rate = (out.mean_charge() - rho.mean_charge()) / h;
        assert_relative_eq!(rate, 0.7, max_relative = 1e-6);
        let back = evolve(&rho, &ops, -0.7, h, h / 4.0).unwrap();
        assert_relative_eq!((back.mean_charge() - rho.mean_charge()) / h, -0.7, max_relative = 1e-6);
    }

    #[test]
    fn phase_state_current() {
        for g0 in [0.2, 0.5, -0.9] {
            let rho = phase_localized_state(60, g0, 0.005);
            let i = current_expectation(&rho, 2.5);
            assert_relative_eq!(i, 2.5 * g0.sin(), max_relative = 5e-3);
        }
    }

    #[test]
    fn evolution_keeps_state_physical() {
        let ops = build_operators(30, 0.02, 1.0).unwrap();
        let rho0 = phase_localized_state(30, 0.3, 0.1);
        let dt = 0.05 / (ops.h_norm() + 0.3);
        let mut worst_herm = 0.0f64;
        let rho = evolve_observed(&rho0, &ops, 0.3, 5.0, dt, |_, r| worst_herm = worst_herm.max(r.hermiticity_error()))
            .unwrap();
        assert!(worst_herm < 1e-10 * 5.0);
        assert!(rho.edge_population(1) < 1e-10);
        assert!((rho.trace().re - 1.0).abs() < 1e-8);
        assert!(rho.is_positive(1e-8));
    }

    #[test]
    fn rejects_unstable_step() {
        let ops = build_operators(10, 1.0, 1.0).unwrap();
        let rho = DenseState::number_state(10, 0);
        assert!(evolve(&rho, &ops, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn expansion_error_shrinks_as_three_halves_power() {
        // The phase operator couples distant charges, so the window must be
        // several times the charge spread of the narrowest state.
        let ops = build_operators(160, 1.0, 1.0).unwrap();
        let mut errs = Vec::new();
        for width in [0.02, 0.005, 0.00125] {
            let rho = phase_localized_state(160, 0.0, width);
            let exact = dissipator_exact(&rho);
            let approx = dissipator_second_order(&rho, &ops);
            let num: f64 = exact.iter().zip(&approx).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let den: f64 = rho.matrix.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            errs.push(num / den);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            // Delta^{3/2} scaling: factor 8 per quartering of the phase variance.
            assert!((ratio - 8.0).abs() < 0.5, "{errs:?}");
        }
    }
}
