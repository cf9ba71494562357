use thiserror::Error;

/// Everything the CLI can fail with, mapped onto exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: cannot parse '{token}' as a finite number")]
    BadToken { line: usize, column: usize, token: String },
    #[error("unsupported Matrix Market {0}")]
    Unsupported(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("{rows} x {cols} matrix exceeds the limit of {} entries", crate::input::MAX_ENTRIES)]
    TooLarge { rows: usize, cols: usize },
    #[error(transparent)]
    Library(#[from] colsel::Error),
}

impl CliError {
    /// Stable machine-readable error name.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Ragged { .. } => "ragged_rows",
            CliError::BadToken { .. } => "bad_token",
            CliError::Unsupported(_) => "unsupported_format",
            CliError::Malformed { .. } => "malformed_input",
            CliError::TooLarge { .. } => "too_large",
            CliError::Library(e) if e.is_solver_failure() => "solver",
            CliError::Library(_) => "domain",
        }
    }

    /// 2 for usage and input problems, 3 for domain errors, 4 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_solver_failure() => 4,
            CliError::Library(_) => 3,
            _ => 2,
        }
    }
}
