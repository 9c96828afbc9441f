use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("user {user} excluded from cluster (non-positive SINR)")]
    UserExcluded { user: usize },

    #[error("infeasible allocation for all orders")]
    InfeasibleAllOrders,

    #[error("coincident positions: user and base station share a location")]
    CoincidentPositions,

    #[error("invalid channel gains: {0}")]
    InvalidGains(String),

    #[error("invalid powers: {0}")]
    InvalidPowers(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid decoding order: {0}")]
    InvalidOrder(String),

    #[error("degenerate channel: both cross products vanish")]
    DegenerateChannel,

    #[error("split index {index} out of range 1..={n_users}")]
    SplitIndexOutOfRange { index: usize, n_users: usize },

    #[error("no feasible allocation on the search grid")]
    NoFeasibleAllocation,

    #[error("oracle value must be positive, got {0}")]
    NonPositiveOracle(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("trend analysis needs at least 3 noise levels, got {0}")]
    TooFewNoiseLevels(usize),

    #[error("instance {index} (base seed {seed}, noise {noise_w:e} W) failed: {source}")]
    Instance {
        seed: u64,
        index: u64,
        noise_w: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    ConfigParse { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
