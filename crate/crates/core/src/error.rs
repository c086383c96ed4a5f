//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("record {index} (`{sample_id}`) does not expose the same score channels as the first record")]
    MixedSchema { index: usize, sample_id: String },

    #[error("ID record {index} (`{sample_id}`) has no correctness flag")]
    MissingCorrectness { index: usize, sample_id: String },

    #[error("OOD record {index} (`{sample_id}`) carries a correctness flag")]
    UnexpectedCorrectness { index: usize, sample_id: String },

    #[error("record {index} (`{sample_id}`) has a non-finite value in channel `{channel}`")]
    NonFiniteScore {
        index: usize,
        sample_id: String,
        channel: String,
    },

    #[error("evaluation set has no records")]
    EmptySet,

    #[error("evaluation set has no ID records")]
    EmptyIdPopulation,

    #[error("unknown score channel `{0}`")]
    UnknownChannel(String),

    #[error("cannot build thresholds from an empty score list")]
    EmptyScores,

    #[error("threshold grid is empty on the {0} axis")]
    EmptyGrid(&'static str),

    #[error("thresholds on the {0} axis are not strictly increasing and finite")]
    UnsortedGrid(&'static str),

    #[error("no risk-coverage points to integrate")]
    NoPoints,

    #[error("the {0} score list is empty")]
    EmptySide(&'static str),

    #[error("oracle limited to {cap} samples, got {len}")]
    CapExceeded { cap: usize, len: usize },

    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("class {0} has no fit sample predicted into it")]
    EmptyClassTemplate(usize),

    #[error("shared covariance is singular even after regularization")]
    SingularCovariance,

    #[error("k = {k} exceeds the feature bank size {bank}")]
    KTooLarge { k: usize, bank: usize },

    #[error("cannot normalize a zero feature vector")]
    ZeroVector,

    #[error("fit features have {rank} non-negligible principal directions, {requested} requested")]
    RankDeficient { rank: usize, requested: usize },

    #[error("fit values of the secondary score have zero spread")]
    DegenerateSpread,

    #[error("{method}: {source}")]
    Method {
        method: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}:{row}: column `{column}`: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{}:{row}: column `{column}`: {message}", path.display())]
    Schema {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Stable identifier used in single-line CLI diagnostics and FFI status codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MixedSchema { .. } => "MixedSchema",
            Error::MissingCorrectness { .. } => "MissingCorrectness",
            Error::UnexpectedCorrectness { .. } => "UnexpectedCorrectness",
            Error::NonFiniteScore { .. } => "NonFiniteScore",
            Error::EmptySet => "EmptySet",
            Error::EmptyIdPopulation => "EmptyIdPopulation",
            Error::UnknownChannel(_) => "UnknownChannel",
            Error::EmptyScores => "EmptyScores",
            Error::EmptyGrid(_) => "EmptyGrid",
            Error::UnsortedGrid(_) => "UnsortedGrid",
            Error::NoPoints => "NoPoints",
            Error::EmptySide(_) => "EmptySide",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NonPositiveTemperature(_) => "NonPositiveTemperature",
            Error::EmptyClassTemplate(_) => "EmptyClassTemplate",
            Error::SingularCovariance => "SingularCovariance",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::ZeroVector => "ZeroVector",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::DegenerateSpread => "DegenerateSpread",
            Error::Method { source, .. } => source.kind(),
            Error::Parse { .. } => "ParseError",
            Error::Schema { .. } => "SchemaError",
            Error::Io { .. } => "IoError",
            Error::Json { .. } => "ParseError",
            Error::Usage(_) => "UsageError",
        }
    }

    pub(crate) fn in_method(self, method: &str) -> Error {
        Error::Method {
            method: method.to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
