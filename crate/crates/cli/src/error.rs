use std::path::PathBuf;

/// Errors surfaced by the commands. Validation problems map to exit code 2,
/// numerical failures to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(#[from] jscatter_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(e) if !is_input_error(e) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// Core errors that mean the input was outside the supported class.
fn is_input_error(e: &jscatter_core::Error) -> bool {
    use jscatter_core::Error::*;
    matches!(e, InvalidGrid(_) | OffIntervalSpectrum { .. } | SymbolAsymmetry { .. } | SzegoViolation { .. } | Invalid(_))
}

pub type CliResult<T> = Result<T, CliError>;
