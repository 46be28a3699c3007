use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("no assigned sub-channel has a positive gain")]
    Infeasible,

    #[error("exhaustive search refused: K*N = {product} exceeds the limit of {limit}")]
    SizeGuard { product: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid channel state: {0}")]
    Channel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
