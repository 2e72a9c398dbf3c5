use std::path::PathBuf;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    InvalidSize,
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node {node} out of range for graph with {node_count} nodes")]
    OutOfRange { node: NodeId, node_count: usize },
    #[error("no social edge between {0} and {1}")]
    MissingEdge(NodeId, NodeId),
    #[error("social graph has {social} nodes but feedback graph has {feedback}")]
    IncompatibleGraphs { social: usize, feedback: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need {requested} seeds but only {available} honest nodes exist")]
    InsufficientSeeds { requested: usize, available: usize },
    #[error("iteration count must be at least 1")]
    ZeroIterations,
    #[error("{requested} requests per Sybil exceed the {honest} honest targets")]
    TooManyRequests { requested: usize, honest: usize },
    #[error("AUC is undefined without both honest and Sybil nodes ({honest} honest, {sybil} Sybil)")]
    UndefinedAuc { honest: usize, sybil: usize },
    #[error("edge list {0} contains no edges")]
    EmptyGraph(PathBuf),
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("unknown config key `{key}`; known keys: {known}")]
    UnknownKey { key: String, known: String },
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error in {path}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }
}
