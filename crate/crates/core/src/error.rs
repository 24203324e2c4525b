use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid tolerance policy: eq_tol={eq_tol}, approx_tol={approx_tol}")]
    Tolerance { eq_tol: f64, approx_tol: f64 },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("subspace containment violated (residual {residual:.3e})")]
    Containment { residual: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("purity requirement not met: {0}")]
    NotPure(String),

    #[error("{what} residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    Residual {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("truncation guard violated: input degree {degree} exceeds trusted degree {limit}")]
    Guard { degree: usize, limit: usize },

    #[error("projection did not stabilize by degree {limit} (last change {last_change:.3e})")]
    NoStabilization { limit: usize, last_change: f64 },

    #[error("inconsistent verdicts: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
