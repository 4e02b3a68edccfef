use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("expected a {expected}-dimensional point, got {got} coordinates")]
    Dimension { expected: usize, got: usize },

    #[error("gap y{index} = {value} is negative")]
    NegativeGap { index: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("value iteration did not converge after {iterations} iterations (last sup-norm change {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("Skorokhod push did not converge after {iterations} iterations (residual {residual:e})")]
    PushNotConverged { iterations: usize, residual: f64 },

    #[error("query point lies outside the truncated lattice (coordinate {coordinate} > radius {radius})")]
    OutOfTruncation { coordinate: i64, radius: usize },

    #[error("unsupported value grid format version {0}")]
    GridVersion(u32),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
