use thiserror::Error;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty window: no design point within h = {h} of the center")]
    EmptyWindow { h: f64 },

    #[error("insufficient data: k = {k} requires more than {k} responses, window has {m}")]
    InsufficientData { k: usize, m: usize },

    #[error("non-positive response {value} among the order statistics used")]
    NonPositiveResponse { value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("schemes are identical, biases cannot be cancelled")]
    IdenticalSchemes,

    #[error("equal asymptotic biases ({0}), no unbiasing combination exists")]
    EqualBiases(f64),

    #[error("weights sum to zero")]
    DegenerateWeights,

    #[error("scheme {0} is only available through discrete weights")]
    DiscreteOnly(&'static str),

    #[error("bias correction requires the second-order parameter rho")]
    MissingRho,

    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("no feasible (h, k) pair: every candidate fails at some grid point")]
    NoFeasiblePair,

    #[error("too few spacings: k = {k}, at least {needed} needed for {bins} bins")]
    TooFewSpacings { k: usize, needed: usize, bins: usize },

    #[error("n = {n} is not a perfect {p}-th power")]
    NotAPerfectPower { n: usize, p: usize },

    #[error("quadrature did not converge: estimated error {0:e}")]
    Quadrature(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
        Error::Parse {
            line,
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
