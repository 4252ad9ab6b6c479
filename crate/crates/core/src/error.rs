use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },

    #[error("system contains a zero polynomial (index {0})")]
    ZeroPolynomial(usize),

    #[error("malformed polynomial system: {0}")]
    MalformedSystem(String),

    #[error("listed true root {index} has residual {residual:e} above tolerance {tolerance:e}")]
    NotARoot { index: usize, residual: f64, tolerance: f64 },

    #[error("polynomial must have degree at least 1")]
    ConstantPolynomial,

    #[error("{0} did not converge")]
    Convergence(&'static str),

    #[error("matrix pencil is singular (det(A - lambda B) vanishes identically)")]
    SingularPencil,

    #[error("Jacobian is singular at the requested point")]
    SingularJacobian,

    #[error("eigenvalue is infinite or defective (|y^T B x| = {0:e})")]
    DefectiveEigenvalue(f64),

    #[error("derivative vanishes at the root (multiple root)")]
    MultipleRoot,

    #[error("requested nullity {nullity} exceeds column count {cols}")]
    NullityTooLarge { nullity: usize, cols: usize },

    #[error("numerical nullity of the Macaulay matrix disagrees with the Bezout count {expected}")]
    NullityMismatch { expected: usize },

    #[error("basis submatrix is numerically singular (condition {0:e})")]
    BasisSingular(f64),

    #[error("candidate basis rows are rank deficient")]
    RankDeficientCandidates,

    #[error("operator determinant Delta_0 is singular")]
    SingularDelta0,

    #[error("eigenvector has no usable affine entries")]
    EigenvectorDegenerate,

    #[error("block sizes are inconsistent: {0}")]
    BlockSizeMismatch(String),

    #[error("polynomial shape not supported: {0}")]
    UnsupportedShape(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
