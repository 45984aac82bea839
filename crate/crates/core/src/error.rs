use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The variants split into user errors (bad input, bad configuration) and
/// numerical failures; [`Error::is_numerical`] drives the CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rational-expectations system is indeterminate ({unstable} unstable roots, {forward} expectational errors)")]
    Indeterminacy { unstable: usize, forward: usize },
    #[error("no stable rational-expectations solution: {0}")]
    NoStableSolution(String),
    #[error("anticipated-regime recursion is singular at step {0}")]
    SingularRecursion(usize),
    #[error("state transition is not stationary (spectral radius {0:.6})")]
    NonStationary(f64),
    #[error("moment matrix Gamma_xx at period {0} is not positive definite")]
    SingularGamma(usize),

    #[error("prior precision is singular and no theory weight is present")]
    DegeneratePrior,
    #[error("Cholesky factorization failed: {0}")]
    CholeskyFailure(String),
    #[error("prior degrees of freedom {nu} too small for N = {n} (need nu > N + 1)")]
    DofTooSmall { nu: f64, n: usize },
    #[error("VAR coefficients are not in companion layout: k = {k}, expected 1 + N*p")]
    NonCompanionable { k: usize },
    #[error("forecast run is empty")]
    EmptyRun,

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
    #[error("dates are not contiguous at row {row}: {prev} -> {next}")]
    Gap {
        row: usize,
        prev: String,
        next: String,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Indeterminacy { .. }
                | Error::NoStableSolution(_)
                | Error::SingularRecursion(_)
                | Error::NonStationary(_)
                | Error::SingularGamma(_)
                | Error::DegeneratePrior
                | Error::CholeskyFailure(_)
        )
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "Dimension",
            Error::InsufficientData(_) => "InsufficientData",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Indeterminacy { .. } => "Indeterminacy",
            Error::NoStableSolution(_) => "NoStableSolution",
            Error::SingularRecursion(_) => "SingularRecursion",
            Error::NonStationary(_) => "NonStationary",
            Error::SingularGamma(_) => "SingularGamma",
            Error::DegeneratePrior => "DegeneratePrior",
            Error::CholeskyFailure(_) => "CholeskyFailure",
            Error::DofTooSmall { .. } => "DofTooSmall",
            Error::NonCompanionable { .. } => "NonCompanionable",
            Error::EmptyRun => "EmptyRun",
            Error::Parse { .. } => "ParseError",
            Error::Gap { .. } => "GapError",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
