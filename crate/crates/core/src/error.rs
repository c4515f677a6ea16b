//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameter or cross-field constraint violation. Carries the full
    /// field path so config loaders can surface it verbatim.
    #[error("config error: {field}: {message}")]
    Config { field: String, message: String },

    /// Field amplitude exceeded the divergence bound during integration.
    #[error("integration diverged at t = {t_ns} ns (|E| > {bound})")]
    Divergence { t_ns: f64, bound: f64 },

    /// Non-finite number encountered in the state or a delayed value.
    #[error("non-finite value at t = {t_ns} ns ({what})")]
    NonFinite { t_ns: f64, what: String },

    /// A lookup or interpolation outside the covered time range.
    #[error("time {t_ns} ns outside covered range [{min_ns}, {max_ns}] ns")]
    OutOfRange { t_ns: f64, min_ns: f64, max_ns: f64 },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("{0}")]
    Analysis(String),

    /// A statistical test cannot run on the given input.
    #[error("test not applicable: {0}")]
    NotApplicable(String),

    #[error("unknown test name: {0}")]
    UnknownTest(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path}: {message}")]
    Format { path: String, message: String },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
