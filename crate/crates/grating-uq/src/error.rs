use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Numerical(#[from] grating_uq_core::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, message: impl ToString) -> Self {
        CliError::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    /// Process exit status: 2 configuration, 3 numerical failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Numerical(e) if e.is_numerical() => 3,
            CliError::Numerical(e) if missing_input(e) => 4,
            CliError::Numerical(_) => 2,
            CliError::Io { .. } | CliError::Format { .. } => 4,
        }
    }
}

fn missing_input(e: &grating_uq_core::Error) -> bool {
    match e {
        grating_uq_core::Error::MissingMeasurement { .. } => true,
        grating_uq_core::Error::Stage { source, .. } => missing_input(source),
        _ => false,
    }
}
