use std::fmt;
use std::path::Path;

use pssc_core::Error as CoreError;

/// Failure of a CLI command, grouped by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Every schema or value violation found in the scenario.
    Schema(Vec<String>),
    /// A solver, set computation or simulation failed.
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(errors) => {
                write!(f, "invalid scenario ({} error(s)):", errors.len())?;
                for e in errors {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            CliError::Io(msg) => write!(f, "I/O error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::InvalidConfig(_) | CoreError::DimensionMismatch { .. } => {
                CliError::Schema(vec![err.to_string()])
            }
            CoreError::NotFinitelyDetermined { iterations } => CliError::Numeric(format!(
                "{err}; raise invariant_set.max_iterations (now {iterations}) or set \
                 invariant_set.lambda slightly below 1, e.g. 0.99"
            )),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Schema(vec![]).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::SingularInnovation).exit_code(), 3);
        assert_eq!(
            CliError::from(CoreError::InvalidConfig("x".into())).exit_code(),
            2
        );
        assert_eq!(CliError::Io("x".into()).exit_code(), 4);
    }

    #[test]
    fn schema_display_lists_every_error() {
        let text = CliError::Schema(vec!["a: bad".into(), "b: worse".into()]).to_string();
        assert!(text.contains("\n  a: bad\n  b: worse"));
    }
}
