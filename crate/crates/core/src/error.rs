use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variant names are stable; the CLI prints them verbatim (see [`Error::name`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error("frame {frame} does not follow {previous} in {game}/{session}")]
    NonMonotonicFrame {
        game: String,
        session: String,
        previous: u64,
        frame: u64,
    },

    #[error("mouse position ({x}, {y}) at frame {frame} is outside the {width}x{height} screen")]
    MouseOutOfBounds {
        frame: u64,
        x: i32,
        y: i32,
        width: u32,
        height: u32,
    },

    #[error("no profile for game `{0}`")]
    MissingProfile(String),

    #[error("record for game `{found}` passed with profile for `{expected}`")]
    ProfileMismatch { expected: String, found: String },

    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported format version {0}")]
    VersionMismatch(u32),

    #[error("file ends before {0}")]
    TruncatedFile(&'static str),

    #[error("{what}: expected {expected}, found {found}")]
    DimMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("non-finite value in row {0}")]
    NonFinite(usize),

    #[error("unknown phrase `{0}`")]
    UnknownPhrase(String),

    #[error("{} ids have no embedding (first: {})", .0.len(), .0.first().map(String::as_str).unwrap_or(""))]
    MissingEmbedding(Vec<String>),

    #[error("zero vector")]
    ZeroVector,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty input")]
    EmptyInput,

    #[error("fewer than two clusters present")]
    SingleCluster,

    #[error("only one class present")]
    SingleClass,

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("unknown game `{0}`")]
    UnknownGame(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// The variant name, e.g. `"UnknownPhrase"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MalformedRow { .. } => "MalformedRow",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::UnknownAction(_) => "UnknownAction",
            Error::NonMonotonicFrame { .. } => "NonMonotonicFrame",
            Error::MouseOutOfBounds { .. } => "MouseOutOfBounds",
            Error::MissingProfile(_) => "MissingProfile",
            Error::ProfileMismatch { .. } => "ProfileMismatch",
            Error::BadMagic(_) => "BadMagic",
            Error::VersionMismatch(_) => "VersionMismatch",
            Error::TruncatedFile(_) => "TruncatedFile",
            Error::DimMismatch { .. } => "DimMismatch",
            Error::DuplicateId(_) => "DuplicateId",
            Error::NonFinite(_) => "NonFinite",
            Error::UnknownPhrase(_) => "UnknownPhrase",
            Error::MissingEmbedding(_) => "MissingEmbedding",
            Error::ZeroVector => "ZeroVector",
            Error::EmptyDataset => "EmptyDataset",
            Error::EmptyInput => "EmptyInput",
            Error::SingleCluster => "SingleCluster",
            Error::SingleClass => "SingleClass",
            Error::DivisionByZero(_) => "DivisionByZero",
            Error::UnknownGame(_) => "UnknownGame",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
