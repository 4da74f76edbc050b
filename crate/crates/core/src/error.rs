use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the geometric and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point leaves the chart: {0}")]
    ChartExit(String),

    #[error("tangent vectors live at different base points")]
    BasePointMismatch,

    #[error("induced metric is degenerate at xi = {0} (|xi| = 1)")]
    Degenerate(Complex64),

    #[error("series did not converge: {0}")]
    Convergence(String),

    #[error("pole of {what} at R = {at}")]
    Pole { what: &'static str, at: f64 },

    #[error("no orbit: I1/I2^2 below 6*sqrt(3) (ratio = {ratio})")]
    NoOrbit { ratio: f64 },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn finite_c(z: Complex64, what: &'static str) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}
