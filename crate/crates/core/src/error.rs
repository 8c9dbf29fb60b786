use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by series construction, joins, sketching, and detection.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series must contain at least one value")]
    EmptySeries,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("series{} is constant (sigma={sigma:.3e} at or below flatness threshold)", fmt_dim(.dimension))]
    ConstantSeries {
        dimension: Option<String>,
        sigma: f64,
    },

    #[error("window length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("series too short: length {len} < required {required}")]
    SeriesTooShort { len: usize, required: usize },

    #[error("window [{start}, {start}+{len}) out of range for series of length {n}")]
    WindowOutOfRange { start: usize, len: usize, n: usize },

    #[error("exclusion radius {radius} leaves window {index} with no admissible neighbor")]
    NoAdmissibleNeighbor { index: usize, radius: usize },

    #[error("duplicate dimension name {name:?}")]
    DuplicateDimension { name: String },

    #[error("dimension {name:?} missing from input")]
    MissingDimension { name: String },

    #[error("unknown dimension {name:?}")]
    UnknownDimension { name: String },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("sketch plans differ (seed/k/assignments); train and test must share one plan")]
    PlanMismatch,

    #[error("all {k} sketched groups are inert (constant or empty)")]
    AllGroupsInert { k: usize },

    #[error("group {group} has no member dimensions")]
    EmptyGroup { group: usize },

    #[error("plant window [{start}, {start}+{len}) out of range for series of length {n}")]
    OutOfRange { start: usize, len: usize, n: usize },

    #[error("labeled scores contain only one class; AUC needs both labels")]
    SingleClass,

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
}

fn fmt_dim(dim: &Option<String>) -> String {
    match dim {
        Some(name) => format!(" (dimension {name:?})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid_config(reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            reason: reason.into(),
        }
    }
}
