//! Delimited text output with an embedded metadata preamble.
//!
//! Layout: `# key=value` lines (tool, version, resolved configuration, derived
//! constants), then one header row, then data rows. Floats use 17 significant
//! digits in scientific notation so every value round-trips. Lines end in LF.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use jjreadout_core::SystemParams;

use crate::config::RunConfig;
use crate::CliError;

pub const TOOL: &str = "jjreadout";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a float with 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stamp {
    /// No wall-clock content.
    Deterministic,
    /// Adds a `generated_unix` metadata line.
    WallClock,
}

/// Accumulates one table in memory and writes it in a single call.
pub struct Table {
    delimiter: char,
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(cfg: &RunConfig, params: Option<&SystemParams>, stamp: Stamp, header: &[&str]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# tool={TOOL}");
        let _ = writeln!(text, "# version={VERSION}");
        if stamp == Stamp::WallClock {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(text, "# generated_unix={secs}");
        }
        for (k, v) in &cfg.resolved {
            let _ = writeln!(text, "# config.{k}={v}");
        }
        if let Some(p) = params {
            for (name, value, unit) in p.metadata() {
                let _ = writeln!(text, "# derived.{name}={} {unit}", num(value));
            }
        }
        let delimiter = cfg.format.delimiter();
        text.push_str(&header.join(&delimiter.to_string()));
        text.push('\n');
        Self { delimiter, text, columns: header.len() }
    }

    /// Appends a row of already formatted fields.
    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        debug_assert_eq!(fields.len(), self.columns);
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.text.push(self.delimiter);
            }
            self.text.push_str(f.as_ref());
        }
        self.text.push('\n');
    }

    /// Appends a row of floats.
    pub fn nums(&mut self, values: &[f64]) {
        let fields: Vec<String> = values.iter().map(|v| num(*v)).collect();
        self.row(&fields);
    }

    pub fn write(&self, dir: &Path, stem: &str, cfg: &RunConfig) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{stem}.{}", cfg.format.extension()));
        std::fs::write(&path, &self.text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }
}
