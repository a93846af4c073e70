use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent. `key` names the
    /// offending setting.
    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("conductivity bound violated at xi = {xi}: {message}")]
    BoundViolation { xi: f64, message: String },

    #[error("time step {dt} exceeds the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("non-finite value encountered at step {step}: {message}")]
    NonFinite { step: usize, message: String },

    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {})",
        .residuals.last().copied().unwrap_or(f64::NAN))]
    CgNonConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("Picard iteration did not converge after {iterations} iterations (last delta {})",
        .deltas.last().copied().unwrap_or(f64::NAN))]
    PicardNonConvergence { iterations: usize, deltas: Vec<f64> },

    #[error("point ({x}, {y}) lies outside the annulus")]
    OutsideDomain { x: f64, y: f64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the numerics rather than by the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::CgNonConvergence { .. }
        )
    }
}
