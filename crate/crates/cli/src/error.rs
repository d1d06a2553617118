use serde_json::json;
use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const SOLVER: u8 = 3;
    pub const INCONCLUSIVE: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("`{field}` {message}")]
    Field { field: String, message: String },

    #[error(transparent)]
    Core(#[from] freebound_core::Error),

    #[error("{0}")]
    Inconclusive(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config { line: None, message: message.into() }
    }

    pub fn config_at(line: usize, message: impl Into<String>) -> Self {
        CliError::Config { line: Some(line), message: message.into() }
    }

    pub fn field(field: &str, message: impl Into<String>) -> Self {
        CliError::Field { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            CliError::Config { line, .. } => *line,
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        use freebound_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::Field { .. } => "config",
            CliError::Core(e) if e.is_solver_failure() => "solver_failure",
            CliError::Core(E::Inconclusive(_) | E::SearchRange { .. } | E::Convergence { .. }) => "inconclusive",
            CliError::Core(_) => "invalid_input",
            CliError::Inconclusive(_) => "inconclusive",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "config" | "invalid_input" => exit::CONFIG,
            "solver_failure" => exit::SOLVER,
            "inconclusive" => exit::INCONCLUSIVE,
            _ => exit::OTHER,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let Some(line) = self.line() {
            v["line"] = json!(line);
        }
        if let CliError::Field { field, .. } = self {
            v["field"] = json!(field);
        }
        v
    }
}
