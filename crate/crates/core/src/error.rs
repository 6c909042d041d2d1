use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength:e} m is outside the usable range [{min:e}, {max:e}] m")]
    WavelengthOutOfRange { wavelength: f64, min: f64, max: f64 },

    #[error("angle {angle} rad is outside [{min}, {max}] rad")]
    AngleOutOfRange { angle: f64, min: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "unphasematchable configuration: no sign change of the mismatch on the cut-angle bracket \
         (dk = {dk_low:e} rad/m at {theta_low} rad, dk = {dk_high:e} rad/m at {theta_high} rad)"
    )]
    Unphasematchable {
        theta_low: f64,
        theta_high: f64,
        dk_low: f64,
        dk_high: f64,
    },

    #[error("no walk-off, tilt cannot act (pump walk-off angle is zero)")]
    NoWalkoff,

    #[error("collinear geometry: spatial-to-spectral mapping undefined")]
    Collinear,

    #[error("empty spectrum: the amplitude vanishes on every grid node")]
    EmptySpectrum,

    #[error("{0}")]
    Numerical(String),

    #[error(
        "target bandwidth {target_nm:.6} nm is unreachable with this pump bandwidth \
         (maximum is 2*sqrt(2)*pump bandwidth = {max_nm:.6} nm)"
    )]
    Unreachable { target_nm: f64, max_nm: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the physics (no phase matching, empty spectrum) as
    /// opposed to malformed or out-of-bounds input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Unphasematchable { .. }
                | Error::NoWalkoff
                | Error::EmptySpectrum
                | Error::Numerical(_)
        )
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
