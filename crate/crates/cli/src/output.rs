//! Output helpers: rounded CSV cells, deterministic file writing and
//! the JSON run summary.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// CSV cell with four decimal places; the run summary keeps full
/// precision.
pub fn fmt4(value: f64) -> String {
    format!("{value:.4}")
}

pub fn fmt4_opt(value: Option<f64>) -> String {
    value.map(fmt4).unwrap_or_default()
}

/// Creates the output directory and writes `name` inside it.
pub fn write_output(out_dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::analysis(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    fs::write(&path, content)
        .map_err(|e| CliError::analysis(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Writes the run summary as pretty JSON with sorted keys.
pub fn write_summary(out_dir: &Path, summary: &serde_json::Value) -> Result<PathBuf, CliError> {
    let text = serde_json::to_string_pretty(summary)
        .map_err(|e| CliError::analysis(format!("cannot serialize summary: {e}")))?;
    write_output(out_dir, "summary.json", &format!("{text}\n"))
}

/// Builds one CSV text from a header and rows, quoting only where
/// needed.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer
        .write_record(header)
        .map_err(|e| CliError::analysis(format!("csv write failed: {e}")))?;
    for row in rows {
        writer
            .write_record(row)
            .map_err(|e| CliError::analysis(format!("csv write failed: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::analysis(format!("csv write failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::analysis(format!("csv write failed: {e}")))
}
