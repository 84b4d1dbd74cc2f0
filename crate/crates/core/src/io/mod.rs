//! File and wire formats: ASCII PLY point clouds, binary PGM depth/mask
//! images, and the JSON record schemas shared by the CLI, the service and
//! the on-disk datasets.

pub mod pgm;
pub mod ply;
pub mod records;

use std::path::Path;

use crate::error::{Error, Result};

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

/// Pretty JSON with a trailing newline; deterministic for deterministic
/// inputs (struct field order, BTreeMap keys, shortest-round-trip floats).
pub fn to_json_string<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json_string(value))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}
