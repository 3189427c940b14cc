use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("integrability lost at t = {t:e} s: {what}")]
    Integrability { t: f64, what: String },

    #[error("square-root branch could not be tracked at t = {t:e} s (phase jump {jump:.3} rad)")]
    Branch { t: f64, jump: f64 },

    #[error("pole: |1 - P| = {value:e} at t = {t:e} s")]
    Pole { t: f64, value: f64 },

    #[error("degenerate denominator: {0}")]
    Degenerate(String),

    #[error("singular closed form: {0}")]
    Singular(String),

    #[error("grid does not cover the state: {0}")]
    Coverage(String),

    #[error("charge window too small: {0}")]
    Truncation(String),

    #[error("integrator failure at t = {t:e}: {what}")]
    Integrator { t: f64, what: String },
}
