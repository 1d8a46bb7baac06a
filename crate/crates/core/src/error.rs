use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must contain at least one agent")]
    EmptyGraph,
    #[error("self-loop on agent {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("endpoint {endpoint} out of range for a graph with {n} agents")]
    EndpointOutOfRange { endpoint: usize, n: usize },
    #[error("graph is not strongly connected: no path from agent {from} to agent {to}")]
    NotStronglyConnected { from: usize, to: usize },

    #[error("failure table is incomplete: {0}")]
    IncompleteTable(String),
    #[error("link ({0}, {1}) is never reliable within the horizon")]
    NeverReliableLink(usize, usize),
    #[error("drop probability {0} must lie in [0, 1)")]
    InvalidProbability(f64),
    #[error("reliability window must be at least 1")]
    InvalidWindow,
    #[error("schedule covers {available} iterations but {requested} were requested")]
    ScheduleTooShort { requested: usize, available: usize },
    #[error("schedule was built for a different graph")]
    ScheduleGraphMismatch,

    #[error("input at agent {agent} has a negative component; the bound assumes nonnegative mass")]
    NegativeInput { agent: usize },
    #[error("agent {agent} has zero weight at iteration {t}")]
    ZeroWeight { agent: usize, t: usize },
    #[error("iteration {t} outside the recorded range [0, {horizon}]")]
    IterationOutOfRange { t: usize, horizon: usize },

    #[error("matrix is not row-stochastic: row {row} sums to {sum}")]
    NotRowStochastic { row: usize, sum: f64 },
    #[error("window of {len} iterations is shorter than the required {required}")]
    WindowTooShort { len: usize, required: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("horizon {horizon} is shorter than the required {required}")]
    HorizonTooShort { horizon: usize, required: usize },
    #[error("reference solver supports d <= 2 without an analytic optimum, got d = {0}")]
    DimensionTooLarge(usize),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
