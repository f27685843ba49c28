use std::fs;
use std::io::Write;
use std::path::Path;

use privkit_core::dataset::load_csv;
use privkit_core::{Dataset, Schema};
use serde::de::DeserializeOwned;
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::at(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::at(path, e))
}

/// Parses `arg` as JSON when it looks like an inline document, otherwise
/// reads it as a file path.
pub fn inline_or_file<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| CliError::data(format!("inline JSON: {e}")))
    } else {
        read_json(Path::new(arg))
    }
}

pub fn load_schema(path: &Path) -> Result<Schema> {
    Schema::from_json(&read_text(path)?).map_err(|e| CliError::at(path, e))
}

pub fn load_dataset(input: &Path, schema: &Path) -> Result<Dataset> {
    let schema = load_schema(schema)?;
    let file = fs::File::open(input).map_err(|e| CliError::at(input, e))?;
    load_csv(file, &schema).map_err(|e| CliError::at(input, e))
}

/// Writes `contents` to a temporary file beside `path` and renames it into
/// place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::at(dir, e))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::at(path, e.error))?;
    Ok(())
}

/// Prints one JSON document with the schema version added.
pub fn emit(out: &mut dyn Write, mut doc: Value) -> Result<()> {
    if let Value::Object(map) = &mut doc {
        map.insert("version".into(), Value::from(1));
    }
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

/// JSON has no infinity; unbounded ε is written as the string `"inf"`.
pub fn epsilon_json(eps: f64) -> Value {
    if eps.is_infinite() {
        Value::from("inf")
    } else {
        Value::from(eps)
    }
}
