use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("malformed signal: {0}")]
    MalformedSignal(String),

    #[error("malformed event log: {0}")]
    MalformedEvents(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),

    #[error("model `{0}` does not produce confidence scores")]
    UnsupportedModel(String),

    #[error("numerical rank deficiency: {0}")]
    NumericalRank(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("malformed csv {}: {msg}", path.display())]
    MalformedCsv { path: PathBuf, msg: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        Error::MalformedCsv {
            path: path.into(),
            msg: msg.to_string(),
        }
    }
}
