use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no Markovian triangulation exists for kappa = {0} (must lie in (0, 2/27])")]
    InvalidKappa(f64),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("partition function diverges for kappa = {0} > 2/27")]
    Divergent(f64),

    #[error("numerical instability in C~ recursion at p = {p}")]
    NumericalInstability { p: usize },

    #[error("perimeter {p} exceeds the precomputed table (p_max = {p_max})")]
    PerimeterBeyondTable { p: usize, p_max: usize },

    #[error("series cannot be certified: {0}")]
    NotCertifiable(String),

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("swallow size k = {k} out of range for perimeter {p}")]
    SwallowOutOfRange { k: usize, p: usize },

    #[error("filler perimeter {got} does not match enclosed hole perimeter {expected}")]
    FillerMismatch { expected: usize, got: usize },

    #[error("insufficient exploration: {0}")]
    InsufficientExploration(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("structural invariant violated: {0}")]
    Invariant(String),

    #[error("inconsistent Boltzmann tables: normalization residual {residual:e} at perimeter {p}")]
    Normalization { p: usize, residual: f64 },

    #[error("input too short: {0}")]
    TooShort(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidKappa(_)
            | Error::Domain(_)
            | Error::Divergent(_)
            | Error::Parse(_)
            | Error::UnknownExperiment(_)
            | Error::TooShort(_)
            | Error::Misuse(_) => 2,
            Error::Budget(_) | Error::PerimeterBeyondTable { .. } => 3,
            _ => 4,
        }
    }
}
