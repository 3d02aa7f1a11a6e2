use thiserror::Error;

/// Failures raised by the synthesis and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix `{what}` is not square ({rows}x{cols})")]
    NotSquare {
        what: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix `{0}` contains non-finite entries")]
    NonFinite(&'static str),
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("pair (-A^T, B^T) is not observable: controllability rank {rank} < {n}")]
    NotObservable { rank: usize, n: usize },
    #[error(
        "infinite-horizon Gramian diverges: min Re(eig A) = {min_real_part} is not above -omega = {neg_omega}"
    )]
    NotIntegrable { min_real_part: f64, neg_omega: f64 },
    #[error("matrix `{0}` is singular or not positive definite")]
    NotPositiveDefinite(&'static str),
    #[error("linear system for {0} is singular")]
    Singular(&'static str),
    #[error("derivative Gramian is indefinite (min eigenvalue {0:e})")]
    Indefinite(f64),
    #[error("operation requires a {expected} Gramian, got {got}")]
    VariantMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("eigenvalue iteration did not converge")]
    EigenSolver,
    #[error("{0}")]
    Quadrature(String),
    #[error("ODE step size underflow (dt = {0:e})")]
    StepUnderflow(f64),
    #[error("trajectory diverged (state norm exceeded {0:e})")]
    Diverged(f64),
    #[error("degenerate trajectory: {0}")]
    Degenerate(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
