use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("dataset not found: {}", .0.display())]
    DatasetNotFound(PathBuf),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] igam::Error),
    #[error(transparent)]
    Service(#[from] igam_service::ApiError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Stable tag printed before the message.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::DatasetNotFound(_) | CliError::FileNotFound(_) => "not_found",
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
            CliError::Service(_) => "service",
            CliError::Io(_) => "io",
        }
    }
}
