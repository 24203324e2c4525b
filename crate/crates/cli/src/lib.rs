//! Batch front-end: validate, analyze and compare pair specifications, and
//! generate random BCL instances. Every command emits one JSON document.

pub mod report;
pub mod spec;

use std::path::Path;

use isopair_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("cannot read or write: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Validation(CoreError),
    #[error("input is not pure: {0}")]
    NotPure(String),
    #[error("consistency failure: {0}")]
    Consistency(String),
}

impl CliError {
    /// Input problems are schema violations; failed residual checks and
    /// truncation failures are consistency failures.
    pub fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::NotPure(msg) => CliError::NotPure(msg),
            CoreError::Residual { .. }
            | CoreError::NoStabilization { .. }
            | CoreError::Inconsistent(_)
            | CoreError::Guard { .. } => CliError::Consistency(e.to_string()),
            other => CliError::Validation(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Consistency(_) => EXIT_INCONSISTENT,
            _ => EXIT_SCHEMA,
        }
    }
}

/// Writes `text` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, text).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
