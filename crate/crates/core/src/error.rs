use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("duplicate identifier `{0}`")]
    DuplicateIdentifier(String),

    #[error("invalid netlist: {}", .0.join("; "))]
    InvalidNetlist(Vec<String>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{line}: {message}")]
    ParseLine { line: usize, message: String },

    #[error("DC operating point did not converge (worst node `{node}`, residual {residual:e} A)")]
    DcNonConvergence { node: String, residual: f64 },

    #[error("transient step did not converge at t = {time:e} s (worst node `{node}`)")]
    TransientNonConvergence { time: f64, node: String },

    #[error("singular circuit matrix")]
    SingularMatrix,

    #[error("no supply source `{0}` in circuit")]
    NoSupply(String),

    #[error("no probe named `{0}`")]
    UnknownProbe(String),

    #[error("no qualifying transition")]
    NoTransition,

    #[error("window [{t0:e}, {t1:e}] outside waveform")]
    WindowOutOfRange { t0: f64, t1: f64 },

    #[error("no lock window found: {0}")]
    NoLockWindow(String),

    #[error("window too short")]
    WindowTooShort,

    #[error("equal frequencies")]
    EqualFrequencies,

    #[error("experiment assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for numerical solver failures (as opposed to bad input or
    /// failed experiment checks).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::DcNonConvergence { .. }
                | Error::TransientNonConvergence { .. }
                | Error::SingularMatrix
        )
    }
}
