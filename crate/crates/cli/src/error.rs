use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(_) => 4,
        })
    }
}

impl From<biasgen_core::Error> for CliError {
    fn from(e: biasgen_core::Error) -> Self {
        match e {
            biasgen_core::Error::Io { .. } => CliError::Io(e.to_string()),
            biasgen_core::Error::InvalidParams(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
