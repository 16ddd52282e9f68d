//! CSV input/output and report formatting.
//!
//! Series files hold one column of values: optional `#` metadata lines, an
//! optional single header row, then one value per line with `.` as the
//! decimal separator and LF endings. Values are written in shortest
//! round-trip decimal form, so a written series reads back bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Read a one-column series, skipping `#` comments and an optional header.
pub fn read_series(path: &Path) -> Result<Vec<f64>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut values = Vec::new();
    let mut header_allowed = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => {
                values.push(v);
                header_allowed = false;
            }
            Err(_) if header_allowed => {
                // Single header row.
                header_allowed = false;
            }
            Err(_) => {
                return Err(format!(
                    "{}:{}: not a number: {line:?}",
                    path.display(),
                    lineno + 1
                ));
            }
        }
    }
    if values.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(values)
}

/// Metadata header embedded in every output file: tool version, the fully
/// resolved configuration, and the seed, so any output is regenerable.
pub fn metadata_header(config: &str, seed: Option<u64>) -> String {
    let mut head = String::new();
    let _ = writeln!(head, "# allpass {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(head, "# config: {config}");
    if let Some(seed) = seed {
        let _ = writeln!(head, "# seed: {seed}");
    }
    head
}

/// Write a one-column series with metadata and a header row.
pub fn write_series(
    path: &Path,
    column: &str,
    values: &[f64],
    config: &str,
    seed: Option<u64>,
) -> Result<(), String> {
    let mut out = metadata_header(config, seed);
    out.push_str(column);
    out.push('\n');
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Write a table as CSV with metadata comments and a header row.
pub fn write_table(
    path: Option<&Path>,
    header: &str,
    rows: &[String],
    config: &str,
    seed: Option<u64>,
) -> Result<(), String> {
    let mut out = metadata_header(config, seed);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    emit(path, &out)
}

/// Write a key-value report (one `key = value` per line) with metadata.
pub fn write_report(
    path: Option<&Path>,
    lines: &[String],
    config: &str,
    seed: Option<u64>,
) -> Result<(), String> {
    let mut out = metadata_header(config, seed);
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    emit(path, &out)
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
