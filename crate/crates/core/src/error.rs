//! Crate-wide error type.

use thiserror::Error;

/// Unified error for simulation, estimation, and I/O failures.
#[derive(Debug, Error)]
pub enum Error {
    /// A domain value failed validation.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An above-threshold formula was evaluated below threshold.
    #[error("bias {bias_ma} mA is below the {threshold_ma} mA threshold")]
    BelowThreshold { bias_ma: f64, threshold_ma: f64 },

    /// The integrator produced a non-finite state.
    #[error("non-finite state at step {step} (t = {time_ps} ps)")]
    NumericalInstability { step: usize, time_ps: f64 },

    /// A curve fit failed to converge or the data were degenerate.
    #[error("fit did not converge after {iterations} iterations (residual {residual:e})")]
    FitFailure { iterations: usize, residual: f64 },

    /// Too few samples for the requested statistic.
    #[error("need at least {required} values, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    /// A detection record points outside the sent-symbol range.
    #[error("record {record} references symbol {symbol_index}, but only {symbol_count} symbols were sent")]
    MalformedRecord {
        record: String,
        symbol_index: u64,
        symbol_count: u64,
    },

    /// Decoy estimation produced a non-positive single-photon yield bound.
    #[error("single-photon yield bound {y1_lower} is not positive; estimation aborted")]
    AbortedEstimation { y1_lower: f64 },

    /// No injection power in the search grid achieved locking.
    #[error("no injection power in the grid locks the laser at {wavelength_nm} nm")]
    NoLock { wavelength_nm: f64 },

    /// A configuration value violates the schema.
    #[error("config `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse: {0}")]
    TomlParse(#[from] toml::de::Error),

    #[error("config write: {0}")]
    TomlWrite(#[from] toml::ser::Error),
}

impl Error {
    /// Shorthand for validation failures.
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Shorthand for config schema violations, naming the offending key path.
    pub fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
