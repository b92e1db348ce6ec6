use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // network construction
    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(String),
    #[error("layer `{layer}`: edge endpoint `{node}` is not declared")]
    EdgeEndpointMissing { layer: String, node: String },
    #[error("layer `{layer}`: edge ({common}, {specific}) has non-positive weight {weight}")]
    NonPositiveWeight {
        layer: String,
        common: String,
        specific: String,
        weight: f64,
    },
    #[error("stickiness must be non-negative, got {0}")]
    NegativeStickiness(f64),
    #[error("network has no nodes")]
    EmptyNetwork,

    // propagation
    #[error("influence source set is empty")]
    EmptySourceSet,
    #[error("influence source `{0}` is not a common node")]
    SourceNotCommonNode(String),
    #[error("transition matrix column {column} sums to {sum}, expected 1")]
    NotStochastic { column: usize, sum: f64 },
    #[error("power iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    // ingest
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: bad date: {reason}")]
    BadDate { line: u64, reason: String },
    #[error("line {line}: area `{area}` belongs to district `{first}` but is also listed under `{second}`")]
    AreaDistrictConflict {
        line: u64,
        area: String,
        first: String,
        second: String,
    },
    #[error("line {line}: {reason}")]
    InvalidRecord { line: u64, reason: String },

    // features
    #[error("borrower `{0}` has no loan in the scoring tail of the window")]
    BorrowerNotInTail(String),
    #[error("missing rank result: {0}")]
    MissingScenarioRun(String),
    #[error("labels must contain at least one positive and one negative")]
    DegenerateLabels,

    // pipeline
    #[error("records span {span} months, shorter than the {window}-month window")]
    SpanTooShort { span: u32, window: u32 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for failures of the underlying reader/writer rather than of the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
