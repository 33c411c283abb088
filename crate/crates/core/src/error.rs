use thiserror::Error;

/// Errors raised by the scattering and sum-rule pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular potential: {0} cannot be sampled pointwise")]
    SingularPotential(String),
    #[error("x = {x} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("moment integral did not converge: {0}")]
    DivergentMoment(String),
    #[error("step-size control underflow at x = {x} (k = {k})")]
    StiffnessFailure { x: f64, k: String },
    #[error("phase branch ambiguous near k = {k}: grid too coarse to unwind")]
    BranchAmbiguity { k: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("Born iteration did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("bound-state cross-check failed: {0}")]
    CrossCheckMismatch(String),
    #[error("spectrum scan incomplete: {0}")]
    ScanIncomplete(String),
    #[error("tail fit failed: fitted exponent {fitted:.3}, expected {expected:.3}")]
    TailFitFailure { fitted: f64, expected: f64 },
    #[error("residue extraction unstable: radii disagree by {0:.3e}")]
    ResidueInstability(f64),
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("potential is not everywhere attractive: V({x}) = {value} > 0")]
    PositivePotential { x: f64, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
