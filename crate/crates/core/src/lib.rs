//! Phase-space model of a Josephson-junction qubit readout.
//!
//! A charge qubit is coupled to a current-biased readout junction. The bias
//! current is switched on at `t = 0` and acts either as a coherent drive
//! (reversible mode) or as a stream of tunnelling Cooper pairs described by a
//! Lindblad channel (irreversible mode). The junction state is carried as a
//! Wigner function split into two diagonal Gaussians `W+`, `W-` and one complex
//! off-diagonal exponential-quadratic `Wx`; the qubit coherence is read off the
//! integral of `Wx`.
//!
//! Internal units: `hbar = 1`, energies in rad/s, times in seconds.

pub mod closedform;
pub mod coeffode;
pub mod dephasing;
pub mod error;
pub mod gaussian;
pub mod lindblad;
pub mod linalg;
pub mod observables;
pub mod ode;
pub mod params;
pub mod residual;

pub use coeffode::{CoeffState, DriveConstants};
pub use error::{Error, Result};
pub use gaussian::GaussianState;
pub use lindblad::DenseState;
pub use params::{PhysicalInputs, SystemParams};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Which qubit branch a diagonal Wigner component belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// `+1.0` for [`Branch::Plus`], `-1.0` for [`Branch::Minus`].
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// How the bias current enters the junction dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Coherent drive only; the joint state stays pure.
    Reversible,
    /// Cooper-pair tunnelling as a Lindblad channel; coherence leaks away.
    Irreversible,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reversible" | "rev" => Ok(Mode::Reversible),
            "irreversible" | "irr" => Ok(Mode::Irreversible),
            other => Err(Error::Parameter(format!("unknown mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Reversible => "reversible",
            Mode::Irreversible => "irreversible",
        })
    }
}
