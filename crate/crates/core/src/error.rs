use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("conditioning event has zero probability (condition-impossible)")]
    ConditionImpossible,

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    QuadratureFailure { estimate: f64, error_bound: f64 },

    #[error("internal consistency: probability {value:e} outside [0, 1] in {context}")]
    Consistency { context: &'static str, value: f64 },

    #[error("scheme {0} has no closed form for this quantity")]
    UnsupportedScheme(&'static str),

    #[error("invalid sweep configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
