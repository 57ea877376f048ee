use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid `{field}`: {rule}")]
    InvalidConfig { field: &'static str, rule: String },

    #[error("hop index {hop} out of range 1..={n_hops}")]
    HopOutOfRange { hop: usize, n_hops: usize },

    #[error("{taps} channel taps exceed {tones} OFDM tones")]
    TapsExceedTones { taps: usize, tones: usize },

    /// A finite-difference limit produced an unusable estimate.
    #[error("numerical limit at probe snr {probe:e} failed: {reason} (samples {samples:?})")]
    NumericLimit {
        probe: f64,
        reason: &'static str,
        samples: Vec<f64>,
    },

    #[error("grid oracle supports at most 3 reuse phases, got {0}")]
    OracleTooLarge(usize),

    #[error("no samples")]
    EmptySamples,

    #[error("probability {0} outside the open unit interval")]
    InvalidProbability(f64),

    #[error("failed to build worker pool: {0}")]
    WorkerPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, rule: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field,
        rule: rule.into(),
    }
}
