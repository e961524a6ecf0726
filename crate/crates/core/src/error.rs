use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("entries sum to {sum}, outside tolerance {tolerance} of 1")]
    SumOutOfTolerance { sum: f64, tolerance: f64 },
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("vector is empty")]
    EmptyVector,
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("document text is empty")]
    EmptyDocument,
    #[error("document {index} has no label")]
    MissingLabel { index: usize },
    #[error("document {index} has no id")]
    MissingId { index: usize },
    #[error("no probabilities imported for document {id}")]
    UnknownDocument { id: String },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("embeddings have {distinct} distinct points, cannot place {k} distinct centroids")]
    DegenerateEmbeddings { distinct: usize, k: usize },
    #[error("document {index} lacks metadata key {key:?}")]
    MissingMetadata { index: usize, key: String },

    #[error("training corpus contains a single class")]
    SingleClassCorpus,
    #[error("label {label} out of range for {n} classes")]
    LabelOutOfRange { label: usize, n: usize },

    #[error("token budget infeasible: {available} dataset tokens for {total} required")]
    InfeasibleBudget { total: u64, available: u64 },
    #[error("retry ceiling exceeded after {draws} draws: {accepted} accepted (rate {acceptance_rate:.3e})")]
    RetryCeilingExceeded {
        draws: usize,
        accepted: usize,
        acceptance_rate: f64,
    },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("zero variance")]
    ZeroVariance,
    #[error("k = {k} exceeds {available} centroids")]
    KTooLarge { k: usize, available: usize },
    #[error("alphabet of {alphabet_size} symbols too small for {n} meta-domains (need {needed})")]
    AlphabetTooSmall {
        alphabet_size: usize,
        n: usize,
        needed: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }

    /// Stable variant name, used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::SumOutOfTolerance { .. } => "SumOutOfTolerance",
            Error::NonFinite { .. } => "NonFinite",
            Error::EmptyVector => "EmptyVector",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::IoFailure { .. } => "IoFailure",
            Error::MalformedRecord { .. } => "MalformedRecord",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::EmptyDocument => "EmptyDocument",
            Error::MissingLabel { .. } => "MissingLabel",
            Error::MissingId { .. } => "MissingId",
            Error::UnknownDocument { .. } => "UnknownDocument",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::DegenerateEmbeddings { .. } => "DegenerateEmbeddings",
            Error::MissingMetadata { .. } => "MissingMetadata",
            Error::SingleClassCorpus => "SingleClassCorpus",
            Error::LabelOutOfRange { .. } => "LabelOutOfRange",
            Error::InfeasibleBudget { .. } => "InfeasibleBudget",
            Error::RetryCeilingExceeded { .. } => "RetryCeilingExceeded",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::ZeroVariance => "ZeroVariance",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::AlphabetTooSmall { .. } => "AlphabetTooSmall",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Json(_) => "Json",
        }
    }

    /// Whether the failure is an infeasibility or non-convergence rather than bad data.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleBudget { .. } | Error::RetryCeilingExceeded { .. }
        )
    }
}
