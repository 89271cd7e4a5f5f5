//! Deterministic file emission: same inputs byte-identical outputs, so no
//! timestamps, hostnames, or absolute paths ever reach a file.

use crate::config::CliError;
use std::fs;
use std::io::Write;
use std::path::Path;

/// Write `content` to `path`, mapping failures to runtime errors.
pub fn write_file(path: &Path, content: &[u8]) -> Result<(), CliError> {
    let mut file = fs::File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(content)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// CSV assembled in memory; rows are plain `Display` joins, floats in
/// shortest round-trip form.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&f.to_string());
        }
        self.buf.push('\n');
    }

    pub fn raw_line(&mut self, line: &str) {
        self.buf.push_str(line);
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Serialize a summary as pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}
