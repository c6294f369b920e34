use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not inside the unit ball (|z|^2 = {norm_sq})")]
    OutsideBall { norm_sq: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not in SU(n,1): {0}")]
    NotInGroup(String),

    #[error("singular fractional-linear map (|denominator| = {0:e})")]
    SingularMap(f64),

    #[error("arccosh argument {0} is below 1 beyond rounding tolerance")]
    NumericalDomain(f64),

    #[error("degenerate phase: smallest Hessian eigenvalue {0:e} is not positive")]
    DegeneratePhase(f64),

    #[error(
        "quadrature did not converge: value {value:e}, estimated relative error {rel_err:e} after {cells} cells"
    )]
    Convergence { value: f64, rel_err: f64, cells: usize },

    #[error("group truncation exceeded {cap} elements")]
    TruncationOverflow { cap: usize },

    #[error("representation rejected: {0}")]
    InconsistentRepresentation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("residual undefined: series norm {0:e} is too small")]
    UndefinedResidual(f64),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
