use thiserror::Error;

/// Errors produced by the geometry kernels and the verification front end.
#[derive(Debug, Error)]
pub enum GeomError {
    /// Caller passed inconsistent arguments (dimension mismatch, bad index,
    /// unparseable spec string, unknown suite name).
    #[error("usage error: {0}")]
    Usage(String),

    /// A point lies outside its chart domain, or too close to the boundary
    /// for the requested finite-difference stencil.
    #[error("domain error: {0}")]
    Domain(String),

    /// Numerically degenerate input: near-dependent basis, vanishing vector,
    /// rank-deficient jacobian.
    #[error("degeneracy error: {0}")]
    Degeneracy(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeomError>;

impl GeomError {
    pub fn usage(msg: impl Into<String>) -> Self {
        GeomError::Usage(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        GeomError::Domain(msg.into())
    }
    pub fn degeneracy(msg: impl Into<String>) -> Self {
        GeomError::Degeneracy(msg.into())
    }
}
