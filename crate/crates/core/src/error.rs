//! Crate-wide error type.

/// Errors produced by construction and simulation routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("temperature {value} K outside the vapor-pressure validity window ({lo}..{hi} K)")]
    TemperatureOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("target density {0:.4e} m^-3 cannot be reached inside the vapor-pressure validity window")]
    DensityOutOfRange(f64),

    #[error("{name} = {value} is not a non-negative half-integer")]
    InvalidHalfInteger { name: &'static str, value: f64 },

    #[error("frequency grid spacing {spacing:.4e} Hz is coarser than the natural linewidth {limit:.4e} Hz")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("grids are not Fourier-compatible: {0}")]
    GridMismatch(String),

    #[error("time step {spacing:.4e} s undersamples the emitter (need <= t1/50 = {limit:.4e} s)")]
    Undersampled { spacing: f64, limit: f64 },

    #[error("quadrature node count {0} must be odd and >= 3")]
    BadNodeCount(usize),

    #[error("waveform norm vanishes (fully absorbed pulse)")]
    ZeroNorm,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fit failed: {0}")]
    FitFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
