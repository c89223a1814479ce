use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants are grouped by what the caller is expected to do about them:
/// input problems (parse, kind, model, domain), numerical preconditions
/// (degeneracies, off-shell starts, collisions) and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invariant `{name}` at byte {offset} is not allowed for kind {kind}")]
    Kind { name: String, offset: usize, kind: String },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("bad parameters for `{model}`: {message}")]
    BadParams { model: String, message: String },

    #[error("degenerate point: {0}")]
    Degeneracy(String),

    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    #[error("degenerate quartic: {0}")]
    DegenerateQuartic(String),

    #[error("system is not hyperbolic: {0}")]
    NotHyperbolic(String),

    #[error("mode collision: eigenvalue spacing {spacing:e} below {limit:e}")]
    ModeCollision { spacing: f64, limit: f64 },

    #[error("grid is empty")]
    EmptyGrid,

    #[error("grid too coarse: {0} samples (need at least 3)")]
    GridTooCoarse(usize),

    #[error("initial ray state is off shell: |H| = {0:e}")]
    OffShellStart(f64),

    #[error("integration step failed: {0}")]
    StepFailure(String),

    #[error("CFL number {0} exceeds 0.9")]
    CflViolation(f64),

    #[error("covector is zero")]
    ZeroCovector,

    #[error("couplings vanish: {0}")]
    ZeroCoupling(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 for input, parse and domain errors, 3 for
    /// numerical precondition failures, 4 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Parse { .. }
            | Error::Kind { .. }
            | Error::UnknownModel(_)
            | Error::BadParams { .. }
            | Error::EmptyGrid
            | Error::GridTooCoarse(_)
            | Error::CflViolation(_)
            | Error::ZeroCovector
            | Error::ZeroCoupling(_)
            | Error::Usage(_)
            | Error::Io(_) => 2,
            Error::Degeneracy(_)
            | Error::DegenerateSystem(_)
            | Error::DegenerateQuartic(_)
            | Error::NotHyperbolic(_)
            | Error::ModeCollision { .. }
            | Error::OffShellStart(_)
            | Error::StepFailure(_) => 3,
            Error::Json(_) | Error::Csv(_) => 4,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(offset: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: msg.into(),
        }
    }
}
