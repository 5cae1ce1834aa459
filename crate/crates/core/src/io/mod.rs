//! File formats: scenarios, LNA tables, PWL waveforms, constellation CSV and
//! run reports. Every writer produces a deterministic byte stream.

mod constellation;
mod pwl;
mod report;
mod scenario;
mod table;

use std::path::PathBuf;

use thiserror::Error;

pub use constellation::{export_constellation, read_constellation, write_constellation};
pub use pwl::{export_pwl, import_pwl, passband_samples, write_pwl, PwlMode, PwlWaveform};
pub use report::{emit_report, render_metrics, render_tuner, Reportable};
pub use scenario::{
    load_scenario, parse_scenario, render_scenario, save_scenario, LnaTableSource, RxConfig,
    Scenario, WaveformConfig,
};
pub use table::{load_lna_table, parse_lna_table, render_lna_table, save_lna_table};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for '{key}': {message}")]
    Validation { key: String, message: String },
    #[error("time must strictly increase (row {row}: {time} after {previous})")]
    NonMonotoneTime {
        row: usize,
        time: f64,
        previous: f64,
    },
    #[error("passband rate {rate_hz} Hz is below the required {required_hz} Hz")]
    RateTooLow { rate_hz: f64, required_hz: f64 },
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(key: &str, message: impl Into<String>) -> Self {
        Self::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|e| IoError::io(path, e))
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

/// `(section, key, value, line, value_column)`.
pub(crate) type IniEntry = (String, String, String, usize, usize);

/// Splits `key = value` INI text into entries. Sections are `[name]`; `#`
/// starts a comment.
pub(crate) fn ini_entries(text: &str) -> Result<Vec<IniEntry>, IoError> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| IoError::Parse {
                line: line_no,
                column: line.find('[').unwrap_or(0) + 1,
                message: "unterminated section header".into(),
            })?;
            section = name.trim().to_string();
            continue;
        }
        let eq = line.find('=').ok_or_else(|| IoError::Parse {
            line: line_no,
            column: line.len() - line.trim_start().len() + 1,
            message: "expected 'key = value'".into(),
        })?;
        let key = line[..eq].trim();
        if key.is_empty() {
            return Err(IoError::Parse {
                line: line_no,
                column: eq + 1,
                message: "missing key before '='".into(),
            });
        }
        let value_part = &line[eq + 1..];
        let column = eq + 2 + (value_part.len() - value_part.trim_start().len());
        out.push((
            section.clone(),
            key.to_string(),
            value_part.trim().to_string(),
            line_no,
            column,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ini_splitting() {
        let e = ini_entries("a = 1\n# c\n[s]\n  b=2 # trailing\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0], ("".into(), "a".into(), "1".into(), 1, 5));
        assert_eq!(e[1], ("s".into(), "b".into(), "2".into(), 4, 5));
    }

    #[test]
    fn ini_errors_carry_position() {
        match ini_entries("[ok]\n  garbage\n") {
            Err(IoError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ini_entries("[open\n"),
            Err(IoError::Parse { line: 1, .. })
        ));
    }
}
