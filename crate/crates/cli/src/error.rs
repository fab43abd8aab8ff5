use thiserror::Error;

/// Exit code for malformed invocations.
pub const EXIT_USAGE: i32 = 64;
/// Exit code for inputs that fail the instance invariants.
pub const EXIT_DATA: i32 = 65;
/// Exit code for failed reads and writes.
pub const EXIT_IO: i32 = 74;
/// Exit code for other internal failures.
pub const EXIT_SOFTWARE: i32 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("{0}")]
    Core(definetti::error::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<definetti::error::Error> for CliError {
    fn from(e: definetti::error::Error) -> Self {
        use definetti::error::Error as E;
        match e {
            E::InvalidInstance(m) => CliError::Instance(m),
            E::TooLarge { .. } | E::Overflow(_) | E::InvalidOccupation { .. } => CliError::Usage(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Instance(_) => EXIT_DATA,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_IO,
            CliError::Core(_) => EXIT_SOFTWARE,
        }
    }
}
