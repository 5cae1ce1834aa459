use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{read_file, write_file, IoError};
use crate::modem::SymbolRecord;

const HEADER: &str = "index,i_rx,q_rx,i_ref,q_ref";

/// CSV text, one row per record sorted by symbol index. Values are written
/// with 17 significant digits so they read back exactly.
pub fn write_constellation(records: &[SymbolRecord]) -> String {
    let mut sorted: Vec<&SymbolRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.index);
    let mut out = format!("{HEADER}\n");
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.index, r.rx.re, r.rx.im, r.reference.re, r.reference.im
        );
    }
    out
}

pub fn export_constellation(records: &[SymbolRecord], path: &Path) -> Result<(), IoError> {
    write_file(path, &write_constellation(records))
}

pub fn read_constellation(path: &Path) -> Result<Vec<SymbolRecord>, IoError> {
    let text = read_file(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => {
            return Err(IoError::Parse {
                line: 1,
                column: 1,
                message: format!("expected header '{HEADER}'"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |column: usize, message: String| IoError::Parse {
            line: i + 1,
            column,
            message,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(1, format!("expected 5 fields, found {}", fields.len())));
        }
        let index = fields[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| bad(1, format!("bad index '{}'", fields[0])))?;
        let mut v = [0.0; 4];
        let mut column = fields[0].len() + 2;
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            *slot = f
                .trim()
                .parse()
                .map_err(|_| bad(column, format!("cannot parse '{f}'")))?;
            column += f.len() + 1;
        }
        out.push(SymbolRecord {
            index,
            rx: Complex64::new(v[0], v[1]),
            reference: Complex64::new(v[2], v[3]),
        });
    }
    Ok(out)
}
