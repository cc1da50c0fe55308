use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("could not reduce point to the fundamental octagon within {max_len} translates (|z| = {modulus})")]
    Reduction { max_len: usize, modulus: f64 },

    #[error("integration error at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("propagation failed at t = {t}: {reason}")]
    Propagation { t: f64, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("bands {lower} and {upper} are degenerate at {location:?} (gap {gap:.3e} below threshold {threshold:.3e})")]
    Degeneracy {
        lower: usize,
        upper: usize,
        location: [f64; 2],
        gap: f64,
        threshold: f64,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("grid too coarse: link overlap {overlap:.3e} at {location:?}")]
    Resolution { overlap: f64, location: [f64; 2] },

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("symmetry violated: residual {residual:.3e} at {location:?}")]
    Symmetry { residual: f64, location: [f64; 2] },

    #[error("no trajectory samples inside the region |z| < {radius}")]
    EmptyRegion { radius: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
