use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("rank deficient: diagonal entry {index} of R is {value:e}, below {threshold:e}")]
    RankDeficient {
        index: usize,
        value: f64,
        threshold: f64,
    },
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("cocycle is not certified invertible: min |det| = {min_abs_det:e} at {at:?}")]
    NotInvertible { min_abs_det: f64, at: Vec<f64> },
    #[error("imaginary shift {shift:?} leaves the strip of radius {radius}")]
    StripViolation { shift: Vec<f64>, radius: f64 },
    #[error("common zero: |a|^2 + |b|^2 = {value:e} at {at:?}")]
    CommonZero { value: f64, at: Vec<f64> },
    #[error("normalization lambda^(k-1) mu^(m-k-1) = 1 is unsatisfiable: {0}")]
    Unsatisfiable(String),
    #[error("non-finite value during {0}")]
    NonFinite(String),
    #[error("top-{k} plane is degenerate: sigma_k / sigma_(k+1) = {ratio}")]
    Degenerate { k: usize, ratio: f64 },
    #[error("degree unresolved: raw = {raw}, residual {residual} (refine the grid)")]
    Unresolved { raw: f64, residual: f64 },
    #[error("malformed factor instance: {0}")]
    MalformedFactor(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
