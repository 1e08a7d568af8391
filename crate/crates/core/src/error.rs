use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition (shape, sign, size range).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("{path}:{line}:{column}: {message}")]
    InputFormat {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("degenerate neighborhood at row {row}: the k+1 nearest neighbors are equidistant")]
    DegenerateNeighborhood { row: usize },

    #[error("vertex {vertex} has zero degree; normalized cut is undefined")]
    DisconnectedVertex { vertex: usize },

    #[error("cluster {cluster} is empty")]
    EmptyCluster { cluster: usize },

    #[error("instance too large for enumeration: n = {n} exceeds {max}")]
    SizeGuard { n: usize, max: usize },

    #[error("partition has {found} clusters but {expected} were requested")]
    DegeneratePartition { found: usize, expected: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty report: {0}")]
    EmptyReport(String),

    #[error("degenerate graph: every Laplacian eigenvalue is zero")]
    DegenerateGraph,
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
