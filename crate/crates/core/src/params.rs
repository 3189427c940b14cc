//! Physical inputs, unit conversion and every derived model constant.
//!
//! Energies enter in units of `k_B * kelvin` and are stored as angular
//! frequencies (rad/s) with `hbar = 1`. Times are seconds.

use crate::error::{Error, Result};
use crate::Branch;

/// Boltzmann constant, J/K (exact, SI 2019).
pub const K_B: f64 = 1.380649e-23;
/// Reduced Planck constant, J s (exact, SI 2019).
pub const HBAR: f64 = 1.054571817e-34;
/// Elementary charge, C (exact, SI 2019).
pub const E_CHARGE: f64 = 1.602176634e-19;
/// Superconducting flux quantum `h / 2e`, Wb.
pub const FLUX_QUANTUM: f64 = std::f64::consts::PI * HBAR / E_CHARGE;

/// Converts an energy in `k_B * K` into an angular frequency in rad/s.
pub fn convert_energy(kelvin: f64) -> f64 {
    kelvin * (K_B / HBAR)
}

/// Bias energy `I * Phi0 / 2pi`, in `k_B * K`, carried by a current in amperes.
pub fn bias_energy_from_current(amperes: f64) -> f64 {
    amperes * FLUX_QUANTUM / (2.0 * std::f64::consts::PI) / K_B
}

/// Raw circuit inputs. Energies in `k_B * K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalInputs {
    /// Qubit Josephson energy.
    pub e_j: f64,
    /// Island charging energy. Echoed in metadata only.
    pub e_c: f64,
    /// Readout-junction charging energy.
    pub e_c0: f64,
    /// Readout-junction Josephson energy.
    pub e_j0: f64,
    /// Bias energy as a fraction of `e_j0`.
    pub bias_ratio: Option<f64>,
    /// Bias current in amperes.
    pub bias_current: Option<f64>,
}

impl PhysicalInputs {
    /// Quantronium device values, biased at 97% of the critical current.
    pub fn quantronium() -> Self {
        Self {
            e_j: 0.86,
            e_c: 0.68,
            e_c0: 0.0037,
            e_j0: 18.4,
            bias_ratio: Some(0.97),
            bias_current: None,
        }
    }

    /// Bias energy in `k_B * K`, reconciling ratio and current when both are set.
    pub fn bias_energy(&self) -> Result<f64> {
        let from_ratio = self.bias_ratio.map(|r| r * self.e_j0);
        let from_current = self.bias_current.map(bias_energy_from_current);
        match (from_ratio, from_current) {
            (Some(r), Some(c)) => {
                let scale = r.abs().max(c.abs());
                if scale > 0.0 && (r - c).abs() > 5e-3 * scale {
                    return Err(Error::Parameter(format!(
                        "bias ratio gives E_b = {r} K but bias current gives {c} K (disagree by more than 0.5%)"
                    )));
                }
                Ok(r)
            }
            (Some(r), None) => Ok(r),
            (None, Some(c)) => Ok(c),
            (None, None) => Ok(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.e_j, self.e_c, self.e_c0, self.e_j0]
            .iter()
            .chain(self.bias_ratio.iter())
            .chain(self.bias_current.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Parameter("inputs must be finite".into()));
        }
        if self.e_j0 <= 0.0 {
            return Err(Error::Parameter(format!("E_J0 must be positive, got {}", self.e_j0)));
        }
        if self.e_c0 <= 0.0 {
            return Err(Error::Parameter(format!("E_C0 must be positive, got {}", self.e_c0)));
        }
        if self.e_j < 0.0 {
            return Err(Error::Parameter(format!("E_J must be non-negative, got {}", self.e_j)));
        }
        Ok(())
    }
}

/// Derived constants of the reduced model. Frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub inputs: PhysicalInputs,
    /// `E_C0 / E_J0`.
    pub nu: f64,
    /// `E_J / E_J0`.
    pub mu: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub lambda_cross: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_cross: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub omega_cross: f64,
    /// Signed bias energy.
    pub bias: f64,
    /// Qubit Josephson energy.
    pub e_j: f64,
    pub e_c0: f64,
    pub e_j0: f64,
    /// Time of maximal separation of the two diagonal components, seconds.
    /// Infinite when the qubit is decoupled.
    pub t0: f64,
}

/// Builds all derived constants from validated inputs.
pub fn build_system(inputs: &PhysicalInputs) -> Result<SystemParams> {
    inputs.validate()?;
    let nu = inputs.e_c0 / inputs.e_j0;
    let mu = inputs.e_j / inputs.e_j0;
    if mu >= 4.0 {
        return Err(Error::Parameter(format!(
            "E_J / E_J0 = {mu} >= 4 leaves the minus-branch well inverted"
        )));
    }
    let e_c0 = convert_energy(inputs.e_c0);
    let e_j0 = convert_energy(inputs.e_j0);
    let e_j = convert_energy(inputs.e_j);
    let bias = convert_energy(inputs.bias_energy()?);

    let lambda_plus = (2.0 * nu / (1.0 + mu / 4.0)).sqrt();
    let lambda_minus = (2.0 * nu / (1.0 - mu / 4.0)).sqrt();
    let lambda_cross = (2.0 * nu).sqrt();
    let omega_cross = (2.0 * e_c0 * e_j0).sqrt();
    let omega_plus = (2.0 * e_c0 * e_j0 * (1.0 + mu / 4.0)).sqrt();
    let omega_minus = (2.0 * e_c0 * e_j0 * (1.0 - mu / 4.0)).sqrt();
    let split = omega_plus - omega_minus;
    let t0 = if split > 0.0 { std::f64::consts::PI / split } else { f64::INFINITY };

    Ok(SystemParams {
        inputs: *inputs,
        nu,
        mu,
        lambda_plus,
        lambda_minus,
        lambda_cross,
        gamma_plus: (lambda_plus / 2.0).sqrt(),
        gamma_minus: (lambda_minus / 2.0).sqrt(),
        gamma_cross: (lambda_cross / 2.0).sqrt(),
        omega_plus,
        omega_minus,
        omega_cross,
        bias,
        e_j,
        e_c0,
        e_j0,
        t0,
    })
}

impl SystemParams {
    /// Paper device values.
    pub fn quantronium() -> Self {
        build_system(&PhysicalInputs::quantronium()).expect("built-in parameters are valid")
    }

    pub fn lambda(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.lambda_plus,
            Branch::Minus => self.lambda_minus,
        }
    }

    pub fn omega(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.omega_plus,
            Branch::Minus => self.omega_minus,
        }
    }

    /// Quadrature scaling `sqrt(lambda / 2)` of a branch.
    pub fn quadrature(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.gamma_plus,
            Branch::Minus => self.gamma_minus,
        }
    }

    /// Copy with the bias energy replaced (rad/s).
    pub fn with_bias(&self, bias: f64) -> Self {
        let mut p = *self;
        p.bias = bias;
        p
    }

    /// Ordered `(name, value, unit)` listing for output metadata.
    pub fn metadata(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("E_J", self.inputs.e_j, "K"),
            ("E_C", self.inputs.e_c, "K"),
            ("E_C0", self.inputs.e_c0, "K"),
            ("E_J0", self.inputs.e_j0, "K"),
            ("E_b", self.bias, "rad/s"),
            ("nu", self.nu, "1"),
            ("mu", self.mu, "1"),
            ("lambda_plus", self.lambda_plus, "1"),
            ("lambda_minus", self.lambda_minus, "1"),
            ("lambda_cross", self.lambda_cross, "1"),
            ("omega_plus", self.omega_plus, "rad/s"),
            ("omega_minus", self.omega_minus, "rad/s"),
            ("omega_cross", self.omega_cross, "rad/s"),
            ("T0", self.t0, "s"),
        ]
    }
}

/// Flux-qubit + DC-SQUID readout inputs. Energies in `k_B * K`, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcSquidInputs {
    /// Qubit level splitting `epsilon_0`.
    pub detuning: f64,
    pub e_j0: f64,
    pub e_c0: f64,
    /// Flux bias angle `pi * Phi_x / Phi0`.
    pub phi_x: f64,
    /// Flux shift angle produced by the qubit's persistent current.
    pub dphi: f64,
    /// Bias energy as a fraction of the effective Josephson energy.
    pub bias_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcSquidMapping {
    pub params: SystemParams,
    /// Relative violation of `epsilon_0 / 2 = E_J0 dphi sin(phi_x)`.
    pub resonance_mismatch: f64,
}

impl DcSquidMapping {
    /// Whether the resonance condition holds within 1%.
    pub fn resonant(&self) -> bool {
        self.resonance_mismatch <= 0.01
    }
}

/// Maps the DC-SQUID readout onto the same reduced model.
pub fn map_dcsquid(s: &DcSquidInputs) -> Result<DcSquidMapping> {
    let cos_x = s.phi_x.cos();
    if cos_x <= 0.0 {
        return Err(Error::Parameter(format!(
            "cos(phi_x) = {cos_x} <= 0: the effective well is inverted"
        )));
    }
    let e_j0_eff = s.e_j0 * cos_x;
    let coupling = s.e_j0 * s.dphi * s.phi_x.sin();
    let e_j_eff = 4.0 * coupling;
    let inputs = PhysicalInputs {
        e_j: e_j_eff.abs(),
        e_c: 0.0,
        e_c0: s.e_c0,
        e_j0: e_j0_eff,
        bias_ratio: Some(s.bias_ratio),
        bias_current: None,
    };
    let params = build_system(&inputs)?;
    let half = s.detuning / 2.0;
    let scale = half.abs().max(coupling.abs());
    let resonance_mismatch = if scale == 0.0 { 0.0 } else { (half - coupling).abs() / scale };
    Ok(DcSquidMapping { params, resonance_mismatch })
}
