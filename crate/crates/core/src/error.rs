//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported QAM order {0}: expected one of 4, 16, 64, 256")]
    UnsupportedOrder(u32),

    #[error("symbol {re}{im:+}j is not on the constellation grid (d = {d})")]
    OffGridSymbol { re: f64, im: f64, d: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("antenna count N = {antennas} must be at least the user count K = {users}")]
    TooFewAntennas { users: usize, antennas: usize },

    #[error("rescaling factor must be positive, got {0}")]
    NonPositiveGamma(f64),

    #[error("channel Gram matrix is numerically singular ({context}, condition estimate {cond:.3e})")]
    SingularChannel { cond: f64, context: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("point is not on the unit sphere (norm = {0})")]
    NotOnSphere(f64),

    #[error("degenerate retraction: x + xi is numerically zero")]
    DegenerateRetraction,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
