use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("jet center or order mismatch")]
    JetMismatch,
    #[error("non-invertible jet: constant coefficient is zero")]
    NonInvertibleJet,
    #[error("zero center component {0}; circle substitution needs nonzero centers")]
    ZeroCenterComponent(usize),
    #[error("order budget exceeded: needed jet order {needed}, available {available}")]
    OrderBudgetExceeded { needed: u32, available: u32 },
    #[error("precision must be at least 53 bits, got {0}")]
    PrecisionTooLow(u32),
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("point is not on the variety (|H(c)| = {0:e})")]
    NotOnVariety(f64),
    #[error("not smooth in distinguished coordinate: partial derivative vanishes")]
    NotSmooth,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial is not symmetric under variable permutation")]
    NotSymmetric,
    #[error("phase numerically flat through order {0}")]
    PhaseFlat(u32),
    #[error("vanishing order parity mismatch: {0}")]
    WrongParity(String),
    #[error("leading phase coefficient incompatible with Re g >= 0: {0}")]
    InvalidLeadingCoefficient(String),
    #[error("degenerate Hessian (|det| = {0:e})")]
    DegenerateHessian(f64),
    #[error("degenerate critical point in dimension {0}; only d = 2 supports degenerate phases")]
    DegenerateHighDimension(usize),
    #[error("expansion error: {0}")]
    Expansion(String),
    #[error("index n = {0} does not make n*alpha integral")]
    NonIntegralIndex(u64),
    #[error("origin on variety: H(0) = 0")]
    OriginOnVariety,
    #[error("index out of bounds: {0:?}")]
    OutOfBounds(Vec<u32>),
    #[error("quadrature did not converge (achieved error estimate {achieved:e}, target {target:e})")]
    Quadrature { achieved: f64, target: f64 },
    #[error("singular matrix")]
    SingularMatrix,
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
