use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A dense matrix does not have the expected sparsity pattern.
    #[error("structure error: {0}")]
    Structure(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("solver did not converge: {0}")]
    Convergence(String),

    /// |b(t)| fell below the floor, so F(t) = z(t)/b(t) is undefined.
    #[error("singular coefficient: |b| < {floor:e} first at t = {time}")]
    SingularCoefficient { time: f64, floor: f64 },

    #[error("integrator failure at t = {time}: {reason}")]
    IntegratorFailure { time: f64, reason: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Convergence(_)
                | Error::SingularCoefficient { .. }
                | Error::IntegratorFailure { .. }
                | Error::NotPsd { .. }
        )
    }
}
