use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Module {
        context: String,
        #[source]
        source: cocycles::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for usage and configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Attaches module/operation context to library errors.
pub trait Context<T> {
    fn ctx(self, context: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for cocycles::Result<T> {
    fn ctx(self, context: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Module { context: context.to_string(), source })
    }
}
