use std::fmt::Write as _;
use std::path::Path;

use super::{read_file, write_file, IoError};
use crate::rfchain::{LnaBiasTable, LnaEntry, RfBlockParams};

const HEADER: &str = "bias_ua,gain_db,nf_db,iip3_dbm";

/// Text form of a ladder:
///
/// ```text
/// vdd_v = 1.2
/// bias_ua,gain_db,nf_db,iip3_dbm
/// 31.25,8,12.5,-20
/// ```
pub fn render_lna_table(table: &LnaBiasTable) -> String {
    let mut out = format!("vdd_v = {}\n{HEADER}\n", table.vdd_v);
    for e in &table.entries {
        let p = &e.params;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.bias_ua, p.gain_db, p.nf_db, p.iip3_dbm
        );
    }
    out
}

pub fn parse_lna_table(text: &str) -> Result<LnaBiasTable, IoError> {
    let mut vdd = None;
    let mut header_seen = false;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if vdd.is_none() {
            let v = line
                .strip_prefix("vdd_v")
                .and_then(|r| r.trim_start().strip_prefix('='))
                .ok_or_else(|| IoError::Parse {
                    line: line_no,
                    column: 1,
                    message: "expected 'vdd_v = <volts>' first".into(),
                })?;
            vdd = Some(v.trim().parse::<f64>().map_err(|_| IoError::Parse {
                line: line_no,
                column: raw.find('=').map_or(1, |p| p + 2),
                message: format!("cannot parse vdd '{}'", v.trim()),
            })?);
            continue;
        }
        if !header_seen {
            if line != HEADER {
                return Err(IoError::Parse {
                    line: line_no,
                    column: 1,
                    message: format!("expected header '{HEADER}'"),
                });
            }
            header_seen = true;
            continue;
        }
        let mut vals = [0.0; 4];
        let mut column = 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(IoError::Parse {
                line: line_no,
                column: 1,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        for (slot, f) in vals.iter_mut().zip(&fields) {
            *slot = f.trim().parse().map_err(|_| IoError::Parse {
                line: line_no,
                column,
                message: format!("cannot parse '{}' as a number", f.trim()),
            })?;
            column += f.len() + 1;
        }
        let [bias_ua, gain, nf, iip3] = vals;
        entries.push(LnaEntry {
            bias_ua,
            params: RfBlockParams::new(&format!("lna@{bias_ua}uA"), gain, nf, iip3),
        });
    }
    let vdd_v = vdd.ok_or_else(|| IoError::validation("vdd_v", "missing"))?;
    LnaBiasTable::new(entries, vdd_v).map_err(|e| IoError::validation("lna_table", e.to_string()))
}

pub fn load_lna_table(path: &Path) -> Result<LnaBiasTable, IoError> {
    parse_lna_table(&read_file(path)?)
}

pub fn save_lna_table(table: &LnaBiasTable, path: &Path) -> Result<(), IoError> {
    write_file(path, &render_lna_table(table))
}
