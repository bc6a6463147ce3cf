use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Gamma function pole at {0}")]
    Pole(f64),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("order {order} exceeds the cap {cap}")]
    Size { order: usize, cap: usize },
    #[error("matrix is not skew-symmetric (deviation {0:e})")]
    NotSkew(f64),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("series for {what} not converged after {terms} terms")]
    Truncation { what: &'static str, terms: usize },
    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("quadrature tail estimate {tail:e} above tolerance {tol:e}")]
    Quadrature { tail: f64, tol: f64 },
    #[error("kernel blocks violate skew consistency by {0:e}")]
    SkewConsistency(f64),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Truncation failures map to exit status 2 in the CLI.
    pub fn is_truncation(&self) -> bool {
        matches!(self, Error::Truncation { .. } | Error::Quadrature { .. })
    }
}
