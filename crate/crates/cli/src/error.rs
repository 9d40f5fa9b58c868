use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", bullet_list(.0))]
    Validation(Vec<String>),

    #[error("numerical failure ({context}): {source}")]
    Numerical {
        context: String,
        #[source]
        source: gaussnm_core::Error,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code: 1 validation, 2 numerical, 3 IO.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical { .. } => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn numerical(context: impl Into<String>) -> impl FnOnce(gaussnm_core::Error) -> Self {
        let context = context.into();
        move |source| CliError::Numerical { context, source }
    }
}

fn bullet_list(items: &[String]) -> String {
    items.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n")
}

pub type CliResult<T> = std::result::Result<T, CliError>;
