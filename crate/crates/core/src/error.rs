use std::path::PathBuf;

/// Errors produced by the protocols, mechanisms and dataset I/O.
#[derive(Debug, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The total budget does not cover the cost of the sampling channel.
    #[error("privacy budget {epsilon} is insufficient: must exceed {required}")]
    BudgetInsufficient { epsilon: f64, required: f64 },

    #[error("value {value} out of range for {what}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    /// `line` is 1-based; 0 means the file as a whole.
    #[error("{}{}: {message}", path.display(), if *line > 0 { format!(":{line}") } else { String::new() })]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("instance too large to enumerate: {0}")]
    Intractable(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Checks that a privacy budget is a positive number. `+inf` is accepted and
/// means "no perturbation".
pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must be positive, got {epsilon}")))
    }
}
