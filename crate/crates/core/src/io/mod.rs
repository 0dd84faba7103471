//! File formats: JSON scenes and memory snapshots, DOT export, CSV tables.

mod dot;
mod scene;
mod snapshot;
mod tables;

use thiserror::Error;

pub use dot::{memory_to_dot, DotOptions};
pub use scene::{parse_scene, SceneDocument, SceneInput};
pub use snapshot::{
    load_memory, memory_digest, read_memory_file, save_memory, write_memory_file, CategoryRecord,
    EdgeRecord, MemorySnapshot, SCHEMA_VERSION,
};
pub use tables::{
    bench_csv, classification_csv, sweep_csv, sweep_summary_csv, to_csv_string, write_csv,
    ClassificationRow, SweepRow,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("unsupported schema_version {found} (this build reads {supported})")]
    SchemaVersion { found: u64, supported: u64 },
    #[error("parse error at line {line}, column {column} (`{path}`): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl FormatError {
    pub(crate) fn validation(field: impl Into<String>, message: impl ToString) -> Self {
        FormatError::Validation {
            field: field.into(),
            message: message.to_string(),
        }
    }

    /// Field path of a parse or validation error, when known.
    pub fn field(&self) -> Option<&str> {
        match self {
            FormatError::Parse { path, .. } => Some(path),
            FormatError::Validation { field, .. } => Some(field),
            FormatError::SchemaVersion { .. } => Some("schema_version"),
            _ => None,
        }
    }
}

/// Deserializes `text` keeping the JSON path and position of the first error.
pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        FormatError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| FormatError::Parse {
        path: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(value)
}
