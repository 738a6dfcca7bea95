use thiserror::Error;

use crate::network::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capture probability {0} is outside [0, 1]")]
    ProbabilityDomain(f64),

    #[error("edge ({from}, {to}) references a node outside [0, {node_count})")]
    DanglingEdge {
        from: u32,
        to: u32,
        node_count: usize,
    },

    #[error("duplicate edge ({from}, {to})")]
    DuplicateEdge { from: NodeId, to: NodeId },

    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),

    #[error("edge ({from}, {to}) has invalid travel time {travel_time}")]
    InvalidTravelTime {
        from: NodeId,
        to: NodeId,
        travel_time: f64,
    },

    #[error("expected {expected} capture probabilities, got {got}")]
    ProbabilityCount { expected: usize, got: usize },

    #[error("node {0} does not exist")]
    UnknownNode(u32),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("no escape route from node {0}")]
    NoEscapeRoute(NodeId),

    #[error("policy revisits node {0}; value table is inconsistent")]
    PolicyCycle(NodeId),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("network has {node_count} nodes, exceeding the enumeration limit of {limit}")]
    TooLarge { node_count: usize, limit: usize },

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("instance with seed {seed} failed: {source}")]
    Instance {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable identifier for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ProbabilityDomain(_) => "probability_domain",
            Error::DanglingEdge { .. } => "dangling_edge",
            Error::DuplicateEdge { .. } => "duplicate_edge",
            Error::SelfLoop(_) => "self_loop",
            Error::InvalidTravelTime { .. } => "invalid_travel_time",
            Error::ProbabilityCount { .. } => "probability_count",
            Error::UnknownNode(_) => "unknown_node",
            Error::InvalidPath(_) => "invalid_path",
            Error::NoEscapeRoute(_) => "no_escape_route",
            Error::PolicyCycle(_) => "policy_cycle",
            Error::Config(_) => "config",
            Error::TooLarge { .. } => "too_large",
            Error::OracleMismatch(_) => "oracle_mismatch",
            Error::Instance { .. } => "instance",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
