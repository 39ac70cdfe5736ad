use thiserror::Error;

/// Errors raised by the computational modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cross-section: {0}")]
    InvalidCrossSection(String),

    #[error("no admissible weight: window ({lo}, {hi}) is empty")]
    NoAdmissibleWeight { lo: f64, hi: f64 },

    #[error("unknown mode {0}")]
    UnknownMode(String),

    #[error("insufficient Taylor data: order {needed} required, operator carries {available}")]
    InsufficientTaylorData { needed: usize, available: usize },

    #[error("degenerate conormal symbol for mode {0}: f_0 vanishes identically")]
    DegenerateConormalSymbol(String),

    #[error("root finder failed to converge for polynomial with coefficients {coeffs:?}")]
    RootFinding { coeffs: Vec<(f64, f64)> },

    #[error("critical exponent: {0}")]
    CriticalExponent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("singular tridiagonal system at row {row} (pivot magnitude {pivot:e})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("not sectorial at angle {theta}: {detail}")]
    NotSectorial { theta: f64, detail: String },

    #[error("contour tail bound {bound:e} exceeds tolerance {tol:e}; increase R_max")]
    TailBound { bound: f64, tol: f64 },

    #[error("ill-conditioned tip fit (condition number {cond:e}); choose a different window")]
    IllConditionedFit { cond: f64 },

    #[error("bracketed only {found} roots, {requested} requested")]
    TooFewRoots { found: usize, requested: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RootFinding { .. }
                | Error::SingularSystem { .. }
                | Error::NotSectorial { .. }
                | Error::TailBound { .. }
                | Error::IllConditionedFit { .. }
                | Error::TooFewRoots { .. }
                | Error::DegenerateConormalSymbol(_)
                | Error::CriticalExponent(_)
        )
    }
}
