use thiserror::Error;

/// Errors raised by the group, calculus, flow and quadrature layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dilation factor must be positive, got {0}")]
    InvalidDilation(f64),

    #[error("invalid group spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("group-spec file could not be parsed: {0}")]
    Parse(String),

    #[error("horizontal gradient vanishes (norm {norm:e}) and p = {p}")]
    VanishingGradient { norm: f64, p: f64 },

    #[error("evaluation at the group identity")]
    AtOrigin,

    #[error("point lies on the vertical axis (|x| = {0:e})")]
    OnVerticalAxis(f64),

    #[error("point lies on the characteristic set (|grad_0 N| = {0:e})")]
    OnCharacteristicSet(f64),

    #[error("flow trajectory entered the exclusion zone at s = {s}")]
    EnteredExclusionZone { s: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("ODE integration failed: {0}")]
    Ode(String),

    #[error("tolerance not met: estimate {estimate:e} > {tol:e}")]
    ToleranceNotMet { estimate: f64, tol: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
