use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { what: String, deviation: f64 },

    #[error("{what} is not unitary (max deviation {deviation:e})")]
    NotUnitary { what: String, deviation: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("invalid basis labels: {0}")]
    InvalidLabels(String),

    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("pathway order {order} exceeds the oracle cap {cap}")]
    OrderCapExceeded { order: usize, cap: usize },

    #[error("no injective frequency assignment for n_max = {n_max} within |gamma| <= {limit}")]
    InjectivityUnachievable { n_max: usize, limit: i64 },

    #[error("classes {first} and {second} both claim bin {bin}")]
    BinCollision { bin: usize, first: String, second: String },

    #[error("sample count {found} does not match the encoding grid size {expected}")]
    SampleCount { expected: usize, found: usize },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error("transition graph is empty")]
    EmptyGraph,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
