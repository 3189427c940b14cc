//! Johnson-Nyquist noise budget of the bias line.
//!
//! Thermal voltage noise of the source resistance drives a current through the
//! junction's input resistance. The noise enters the phase as a random bias,
//! giving a white-noise dephasing rate and a bandwidth-limited estimate of the
//! decoherence rate set by the mean absolute bias.

use crate::params::{FLUX_QUANTUM, HBAR, K_B};
use std::f64::consts::PI;

/// Readout-line resistances, temperature and bandwidth (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitNoise {
    /// Source (Johnson) resistance, ohm.
    pub r1: f64,
    /// Input resistance the noise current flows into, ohm.
    pub r2: f64,
    /// Temperature, kelvin.
    pub temperature: f64,
    /// Bandwidth, Hz.
    pub bandwidth: f64,
}

impl CircuitNoise {
    /// 50 ohm source at liquid-helium temperature, 3.5 kohm input, 200 MHz bandwidth.
    pub fn helium_bath() -> Self {
        Self { r1: 50.0, r2: 3.5e3, temperature: 4.2, bandwidth: 200e6 }
    }

    pub fn is_valid(&self) -> bool {
        [self.r1, self.r2, self.temperature, self.bandwidth].iter().all(|v| v.is_finite() && *v > 0.0)
    }
}

/// Zero-frequency current noise density `sqrt(4 R1 k_B T) / R2`, A/sqrt(Hz).
pub fn current_noise_spectrum(c: &CircuitNoise) -> f64 {
    (4.0 * c.r1 * K_B * c.temperature).sqrt() / c.r2
}

/// White-noise dephasing rate `(S_I Phi0 / (2 pi hbar))^2`, s^-1.
pub fn gamma_noise(c: &CircuitNoise) -> f64 {
    let x = current_noise_spectrum(c) * FLUX_QUANTUM / (2.0 * PI * HBAR);
    x * x
}

/// RMS noise current `sqrt(4 R1 k_B T B) / R2`, A.
pub fn i_rms(c: &CircuitNoise) -> f64 {
    (4.0 * c.r1 * K_B * c.temperature * c.bandwidth).sqrt() / c.r2
}

/// Mean absolute noise current `sqrt(2/pi) I_rms` (Gaussian process), A.
pub fn mean_abs_current(c: &CircuitNoise) -> f64 {
    (2.0 / PI).sqrt() * i_rms(c)
}

/// Decoherence rate `<|I|> Phi0 / (4 pi hbar)`, s^-1.
pub fn gamma_deph(c: &CircuitNoise) -> f64 {
    mean_abs_current(c) * FLUX_QUANTUM / (4.0 * PI * HBAR)
}

/// Ratio of the two rates written directly in the inputs,
/// `S_I Phi0 / (sqrt(2 pi) hbar sqrt(B))`, using `I_rms = S_I sqrt(B)`.
pub fn rate_ratio_identity(c: &CircuitNoise) -> f64 {
    current_noise_spectrum(c) * FLUX_QUANTUM / ((2.0 * PI).sqrt() * HBAR * c.bandwidth.sqrt())
}

/// A rate reported both as the raw `s^-1` number and divided by `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConventions {
    /// The rate as computed, s^-1 (angular convention).
    pub angular: f64,
    /// The rate divided by `2 pi` (cycle convention).
    pub cycles: f64,
}

impl RateConventions {
    pub fn new(rate: f64) -> Self {
        Self { angular: rate, cycles: rate / (2.0 * PI) }
    }

    /// Which convention lies closer to `target` (same units), in log distance.
    pub fn nearest(&self, target: f64) -> &'static str {
        let da = (self.angular / target).ln().abs();
        let dc = (self.cycles / target).ln().abs();
        if da <= dc {
            "angular"
        } else {
            "cycles"
        }
    }
}

/// Full budget for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudget {
    pub spectrum: f64,
    pub i_rms: f64,
    pub gamma_noise: RateConventions,
    pub gamma_deph: RateConventions,
    pub ratio: f64,
}

pub fn noise_budget(c: &CircuitNoise) -> NoiseBudget {
    let gn = gamma_noise(c);
    let gd = gamma_deph(c);
    NoiseBudget {
        spectrum: current_noise_spectrum(c),
        i_rms: i_rms(c),
        gamma_noise: RateConventions::new(gn),
        gamma_deph: RateConventions::new(gd),
        ratio: gn / gd,
    }
}
