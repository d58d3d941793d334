use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("uncovered node: graph node '{0}' has no community assignment")]
    UncoveredNode(String),

    #[error("unknown node label '{0}'")]
    UnknownNode(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("alpha out of range: {0} (expected 0 < alpha < 1)")]
    AlphaOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation requires a directed graph")]
    NotDirected,

    #[error("operation requires an undirected graph")]
    NotUndirected,

    #[error("graph has no edges")]
    EdgelessGraph,

    #[error("node sets overlap")]
    OverlappingSets,

    #[error("no common nodes between the inputs")]
    EmptyIntersection,

    #[error("no communities survive the size filter (min size {0})")]
    NoCommunitiesSurvive(usize),

    #[error("distance matrix is not symmetric at ({0}, {1})")]
    AsymmetricDistance(usize, usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
