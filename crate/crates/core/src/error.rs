use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants fall into three broad classes that the experiment runner maps
/// to exit codes: input/configuration problems, numerical failures, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("algebra construction failed: {what} residual {residual:.3e}")]
    Construction { what: &'static str, residual: f64 },

    #[error("momentum has a component of size {residual:.3e} along ann(x)")]
    InconsistentMomentum { residual: f64 },

    #[error("integration diverged at step {step}: constraint residual {residual:.3e}")]
    Divergence { step: usize, residual: f64 },

    #[error("trajectory is not circular: fit residual {residual:.3e}")]
    Shape { residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }

    /// True for failures of a numerical routine (as opposed to bad inputs or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. }
                | Error::Shape { .. }
                | Error::Numerical(_)
                | Error::InconsistentMomentum { .. }
                | Error::Construction { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
