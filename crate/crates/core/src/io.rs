//! Artifact formatting shared by every writer.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Fixed 17-significant-digit form used in every CSV cell.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `value` as pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes CSV text built by `f` into `path`.
pub fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}
