use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample: at least one observation is required")]
    EmptySample,

    #[error("negative observation {value} at index {index}")]
    NegativeObservation { index: usize, value: f64 },

    #[error("non-finite observation at index {index}")]
    NonFiniteObservation { index: usize },

    #[error("degenerate support: every observation is 0")]
    DegenerateSupport,

    #[error("cannot build a majorant from an empty point set")]
    NoPoints,

    #[error("non-finite coordinate in point {index}")]
    NonFiniteCoordinate { index: usize },

    #[error("points must be sorted by x (violation at index {index})")]
    UnsortedPoints { index: usize },

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("interval endpoint {value} does not lie on the grid")]
    OffGrid { value: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid step density: {0}")]
    InvalidStepDensity(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("evaluation point {0} is negative")]
    NegativeArgument(f64),

    #[error("divergent tail: the integrand does not vanish at density 0 and no compact domain was declared")]
    DivergentTail,

    #[error("domain end {end} lies before the end of the density support {support}")]
    DomainTooShort { end: f64, support: f64 },

    #[error(
        "derivative `{which}` disagrees with finite differences at z={z}, x={x}: supplied {supplied}, numeric {numeric}"
    )]
    DerivativeMismatch {
        which: &'static str,
        z: f64,
        x: f64,
        supplied: f64,
        numeric: f64,
    },

    #[error("degenerate normalization: h''(1) = 0")]
    DegenerateNormalization,

    #[error("confidence level {0} must lie strictly between 0 and 1")]
    InvalidLevel(f64),

    #[error("unknown functional `{name}`; valid names: {valid}")]
    UnknownFunctional { name: String, valid: String },

    #[error("unknown scenario `{name}`; valid names: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from user input (configuration, data files,
    /// names) rather than from a numerical breakdown.
    pub fn is_config(&self) -> bool {
        !matches!(
            self,
            Error::Numeric(_)
                | Error::DerivativeMismatch { .. }
                | Error::DegenerateNormalization
                | Error::DivergentTail
        )
    }
}
