//! File formats: marker streams, scenes, vertex lists, drift traces, reports.

pub mod frames;
pub mod report;
pub mod scene;
pub mod trace;
pub mod vertices;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json_file<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub(crate) fn parse_json(text: &str) -> Result<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))
}

pub(crate) fn json_error_to_schema(path: &str, e: serde_json::Error) -> Error {
    Error::schema(if path.is_empty() { "/" } else { path }, e.to_string())
}

/// Hex SHA-256 of a file's bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_bytes(path: impl Into<String>, bytes: &[u8]) -> Self {
        Self {
            path: path.into(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }

    pub fn of_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        Ok(Self::of_bytes(path.display().to_string(), &bytes))
    }
}

pub(crate) fn check_schema_version(doc: &serde_json::Value) -> Result<()> {
    match doc.get("schema_version") {
        None => Err(Error::schema("/schema_version", "missing")),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => Ok(()),
        Some(v) => Err(Error::schema(
            "/schema_version",
            format!("unsupported version {v}, expected {SCHEMA_VERSION}"),
        )),
    }
}
