use std::fmt::Write as _;
use std::path::Path;

use super::{write_file, IoError};
use crate::metrics::MetricsReport;
use crate::tuner::TunerResult;

/// Anything `emit_report` can render.
pub trait Reportable {
    fn render(&self) -> String;
}

impl Reportable for MetricsReport {
    fn render(&self) -> String {
        render_metrics(std::slice::from_ref(self))
    }
}

impl Reportable for [MetricsReport] {
    fn render(&self) -> String {
        render_metrics(self)
    }
}

impl Reportable for Vec<MetricsReport> {
    fn render(&self) -> String {
        render_metrics(self)
    }
}

impl Reportable for TunerResult {
    fn render(&self) -> String {
        render_tuner(self)
    }
}

fn key_values(out: &mut String, prefix: &str, r: &MetricsReport) {
    let rows: [(&str, String); 15] = [
        ("bias_ua", format!("{}", r.bias_ua)),
        ("power_mw", format!("{}", r.power_mw)),
        ("bit_errors", r.bit_errors.to_string()),
        ("bits_total", r.bits_total.to_string()),
        ("ber", format!("{}", r.ber)),
        ("symbol_errors", r.symbol_errors.to_string()),
        ("symbols_total", r.symbols_total.to_string()),
        ("ser", format!("{}", r.ser)),
        ("evm_rms_pct", format!("{}", r.evm_rms_pct)),
        ("mer_db", format!("{}", r.mer_db)),
        ("packet_errors", r.packet_errors.to_string()),
        ("packets_total", r.packets_total.to_string()),
        ("per", format!("{}", r.per)),
        ("reference_energy", format!("{}", r.reference_energy)),
        ("error_energy", format!("{}", r.error_energy)),
    ];
    for (k, v) in rows {
        let _ = writeln!(out, "{prefix}{k}={v}");
    }
}

/// Fixed-width summary, one row per setting, highest bias first.
fn table(out: &mut String, reports: &[MetricsReport]) {
    let mut sorted: Vec<&MetricsReport> = reports.iter().collect();
    sorted.sort_by(|a, b| b.bias_ua.total_cmp(&a.bias_ua));
    let _ = writeln!(
        out,
        "# {:>9} {:>9} {:>10} {:>10} {:>8} {:>7} {:>4}",
        "bias_uA", "power_mW", "BER", "SER", "EVM_%", "MER_dB", "PE"
    );
    for r in sorted {
        let _ = writeln!(
            out,
            "# {:>9.2} {:>9.4} {:>10.3e} {:>10.3e} {:>8.3} {:>7.2} {:>4}",
            r.bias_ua, r.power_mw, r.ber, r.ser, r.evm_rms_pct, r.mer_db, r.packet_errors
        );
    }
}

/// Key-value lines for each report followed by the summary table. A single
/// report uses bare keys; several use `setting.<i>.` prefixes.
pub fn render_metrics(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    if let [single] = reports {
        key_values(&mut out, "", single);
    } else {
        let _ = writeln!(out, "settings={}", reports.len());
        for (i, r) in reports.iter().enumerate() {
            key_values(&mut out, &format!("setting.{i}."), r);
        }
    }
    out.push('\n');
    table(&mut out, reports);
    out
}

pub fn render_tuner(result: &TunerResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "chosen_bias_ua={}", result.chosen_bias_ua);
    let _ = writeln!(out, "chosen_power_mw={}", result.chosen_power_mw);
    let _ = writeln!(out, "reduction_factor={}", result.reduction_factor);
    let _ = writeln!(out, "settings={}", result.per_setting_reports.len());
    for (i, r) in result.per_setting_reports.iter().enumerate() {
        key_values(&mut out, &format!("setting.{i}."), r);
    }
    out.push('\n');
    table(&mut out, &result.per_setting_reports);
    out.push('\n');
    for line in result.decision_trace.lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

pub fn emit_report<R: Reportable + ?Sized>(results: &R, path: &Path) -> Result<(), IoError> {
    write_file(path, &results.render())
}
