use thiserror::Error;

use crate::fusion::ModeId;
use crate::lattice::TorusCoord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("lattice size {0} is below the minimum of 2")]
    LatticeTooSmall(u32),
    #[error("class ({dx},{dy}) does not connect {from} to {to}")]
    IncongruentClass {
        from: TorusCoord,
        to: TorusCoord,
        dx: i64,
        dy: i64,
    },
    #[error("edge set is not closed: cell {0} has odd degree")]
    NotClosed(TorusCoord),
    #[error("boundary does not match the odd cells of the edge set ({expected} odd cells, {given} given)")]
    InconsistentBoundary { expected: usize, given: usize },
    #[error("edge joins a cell to itself")]
    DegenerateEdge,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FusionError {
    #[error("cells {0} and {1} are not adjacent")]
    NotAdjacent(TorusCoord, TorusCoord),
    #[error("mode {0} is not alive")]
    DeadMode(ModeId),
    #[error("mode {0} used twice in one operation")]
    SameMode(ModeId),
    #[error("mode {mode} belongs to the pair of mode {other}")]
    OwnPair { mode: ModeId, other: ModeId },
    #[error("modes {0} and {1} are not co-located")]
    NotColocated(ModeId, ModeId),
    #[error("outcome of fusing {0} and {1} is deterministic and differs from the requested one")]
    ImpossibleOutcome(ModeId, ModeId),
    #[error("oracle capacity exceeded: {0} modes (maximum 12)")]
    OracleCapacity(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("cannot perfectly match an odd number of nodes ({0})")]
    OddNodeCount(usize),
    #[error("brute-force matching is capped at 12 nodes, got {0}")]
    TooManyNodes(usize),
    #[error("duplicate node id {0}")]
    DuplicateId(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("L must be an even number of at least 4, got {0}")]
    LatticeSize(u32),
    #[error("p must satisfy 0 <= p and 2p < 1, got {0}")]
    ErrorRate(f64),
    #[error("T must be at least 1")]
    Rounds,
    #[error("trials must be at least 1")]
    Trials,
    #[error("sweep has no points")]
    EmptySweep,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error("completion did not finish within {0} rounds")]
    CompletionTimeout(u32),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
