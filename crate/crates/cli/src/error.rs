use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(#[from] anyladder_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 1 for configuration problems, 2 for numerical
    /// failures. I/O errors count as configuration problems (bad paths).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io(_) => 1,
            CliError::Numerical(e) => match e {
                anyladder_core::Error::InvalidParameter(_)
                | anyladder_core::Error::EmptyBasis { .. }
                | anyladder_core::Error::SectorMismatch(_) => 1,
                _ => 2,
            },
        }
    }
}
