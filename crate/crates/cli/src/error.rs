use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", format_list(.0))]
    Config(Vec<String>),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] orbitflow::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn format_list(items: &[String]) -> String {
    items.iter().map(|s| format!("  - {s}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for configuration and usage errors, 2 for numerical failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Core(orbitflow::Error::Io(_)) | CliError::Io { .. } => 3,
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::Core(_) => 1,
        }
    }
}
