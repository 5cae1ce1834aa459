//! Link scoring: bit, symbol and packet error rates, EVM and MER.
//!
//! EVM is taken from means and MER from sums, both against the reference
//! power, so on shared records `mer_db = -20 log10(evm_rms_pct / 100)`.

use thiserror::Error;

use crate::framing::{FrameError, ParsedFrame};
use crate::modem::SymbolRecord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("length mismatch: {rx} received vs {tx} transmitted")]
    LengthMismatch { rx: usize, tx: usize },
    #[error("no symbol records")]
    EmptyInput,
}

/// `(errors, total, rate)`; the rate is NaN when `total` is zero.
pub type ErrorCount = (u64, u64, f64);

fn rate(errors: u64, total: u64) -> f64 {
    if total == 0 {
        f64::NAN
    } else {
        errors as f64 / total as f64
    }
}

pub fn compute_ber(rx: &[bool], tx: &[bool]) -> Result<ErrorCount, MetricsError> {
    if rx.len() != tx.len() {
        return Err(MetricsError::LengthMismatch {
            rx: rx.len(),
            tx: tx.len(),
        });
    }
    let errors = rx.iter().zip(tx).filter(|(a, b)| a != b).count() as u64;
    let total = rx.len() as u64;
    Ok((errors, total, rate(errors, total)))
}

/// Compares sliced constellation indices.
pub fn compute_ser(rx: &[usize], tx: &[usize]) -> Result<ErrorCount, MetricsError> {
    if rx.len() != tx.len() {
        return Err(MetricsError::LengthMismatch {
            rx: rx.len(),
            tx: tx.len(),
        });
    }
    let errors = rx.iter().zip(tx).filter(|(a, b)| a != b).count() as u64;
    let total = rx.len() as u64;
    Ok((errors, total, rate(errors, total)))
}

/// `(sum |ref|^2, sum |rx - ref|^2)` over the records.
pub fn error_energies(records: &[SymbolRecord]) -> (f64, f64) {
    records.iter().fold((0.0, 0.0), |(r, e), s| {
        (
            r + s.reference.norm_sqr(),
            e + (s.rx - s.reference).norm_sqr(),
        )
    })
}

fn evm_from_energies(reference: f64, error: f64) -> f64 {
    100.0 * (error / reference).sqrt()
}

fn mer_from_energies(reference: f64, error: f64) -> f64 {
    if error == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (reference / error).log10()
    }
}

/// RMS error vector magnitude in percent of the reference RMS.
pub fn compute_evm(records: &[SymbolRecord]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = records.len() as f64;
    let (r, e) = error_energies(records);
    Ok(evm_from_energies(r / n, e / n))
}

/// Modulation error ratio in dB; `+inf` when the error energy is zero.
pub fn compute_mer(records: &[SymbolRecord]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let (r, e) = error_energies(records);
    Ok(mer_from_energies(r, e))
}

/// A packet fails on any header or payload check failure.
pub fn compute_per(frames: &[Result<ParsedFrame, FrameError>]) -> ErrorCount {
    let errors = frames
        .iter()
        .filter(|f| !matches!(f, Ok(p) if p.payload_ok))
        .count() as u64;
    let total = frames.len() as u64;
    (errors, total, rate(errors, total))
}

/// Aggregate scores for one bias setting.
///
/// `reference_energy` and `error_energy` carry the EVM/MER sums so reports
/// from parallel trials merge exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub bit_errors: u64,
    pub bits_total: u64,
    pub ber: f64,
    pub symbol_errors: u64,
    pub symbols_total: u64,
    pub ser: f64,
    pub evm_rms_pct: f64,
    pub mer_db: f64,
    pub packets_total: u64,
    pub packet_errors: u64,
    pub per: f64,
    pub bias_ua: f64,
    pub power_mw: f64,
    pub reference_energy: f64,
    pub error_energy: f64,
}

impl MetricsReport {
    pub fn empty(bias_ua: f64, power_mw: f64) -> Self {
        let mut r = Self {
            bit_errors: 0,
            bits_total: 0,
            ber: 0.0,
            symbol_errors: 0,
            symbols_total: 0,
            ser: 0.0,
            evm_rms_pct: 0.0,
            mer_db: 0.0,
            packets_total: 0,
            packet_errors: 0,
            per: 0.0,
            bias_ua,
            power_mw,
            reference_energy: 0.0,
            error_energy: 0.0,
        };
        r.recompute();
        r
    }

    /// Builds a report from raw counts and recomputes the rates.
    pub fn from_counts(
        bits: ErrorCount,
        symbols: ErrorCount,
        packets: ErrorCount,
        records: &[SymbolRecord],
        bias_ua: f64,
        power_mw: f64,
    ) -> Self {
        let mut r = Self::empty(bias_ua, power_mw);
        r.bit_errors = bits.0;
        r.bits_total = bits.1;
        r.symbol_errors = symbols.0;
        r.symbols_total = symbols.1;
        r.packet_errors = packets.0;
        r.packets_total = packets.1;
        let (re, ee) = error_energies(records);
        r.reference_energy = re;
        r.error_energy = ee;
        r.recompute();
        r
    }

    fn recompute(&mut self) {
        self.ber = rate(self.bit_errors, self.bits_total);
        self.ser = rate(self.symbol_errors, self.symbols_total);
        self.per = rate(self.packet_errors, self.packets_total);
        if self.symbols_total == 0 || self.reference_energy == 0.0 {
            self.evm_rms_pct = f64::NAN;
            self.mer_db = f64::NAN;
        } else {
            self.evm_rms_pct = evm_from_energies(self.reference_energy, self.error_energy);
            self.mer_db = mer_from_energies(self.reference_energy, self.error_energy);
        }
    }

    /// Sums counts and energies; the bias and power of `self` are kept.
    pub fn merge(&mut self, other: &MetricsReport) {
        self.bit_errors += other.bit_errors;
        self.bits_total += other.bits_total;
        self.symbol_errors += other.symbol_errors;
        self.symbols_total += other.symbols_total;
        self.packet_errors += other.packet_errors;
        self.packets_total += other.packets_total;
        self.reference_energy += other.reference_energy;
        self.error_energy += other.error_energy;
        self.recompute();
    }

    pub fn merged<'a>(reports: impl IntoIterator<Item = &'a MetricsReport>) -> Option<Self> {
        let mut it = reports.into_iter();
        let mut acc = it.next()?.clone();
        for r in it {
            acc.merge(r);
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing::{build_frame, parse_frame};
    use num_complex::Complex64;

    fn rec(rx: Complex64, reference: Complex64) -> SymbolRecord {
        SymbolRecord {
            index: 0,
            rx,
            reference,
        }
    }

    #[test]
    fn ber_cases() {
        let tx: Vec<bool> = (0..4272).map(|i| i % 3 == 0).collect();
        assert_eq!(compute_ber(&tx, &tx).unwrap(), (0, 4272, 0.0));
        let mut one = tx.clone();
        one[100] = !one[100];
        let (e, _, r) = compute_ber(&one, &tx).unwrap();
        assert_eq!(e, 1);
        assert!((r - 2.341e-4).abs() < 1e-7);
        let inv: Vec<bool> = tx.iter().map(|b| !b).collect();
        assert_eq!(compute_ber(&inv, &tx).unwrap().2, 1.0);
        assert!(compute_ber(&tx[1..], &tx).is_err());
    }

    #[test]
    fn ser_cases() {
        assert_eq!(compute_ser(&[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap().0, 0);
        assert_eq!(
            compute_ser(&[0, 1, 2, 3], &[0, 1, 2, 2]).unwrap(),
            (1, 4, 0.25)
        );
        assert!(matches!(
            compute_ser(&[0], &[]),
            Err(MetricsError::LengthMismatch { rx: 1, tx: 0 })
        ));
    }

    #[test]
    fn evm_and_mer() {
        let pts = [
            Complex64::new(1.0, 1.0) / 2f64.sqrt(),
            Complex64::new(-1.0, 1.0) / 2f64.sqrt(),
        ];
        let exact: Vec<_> = pts.iter().map(|&p| rec(p, p)).collect();
        assert_eq!(compute_evm(&exact).unwrap(), 0.0);
        assert_eq!(compute_mer(&exact).unwrap(), f64::INFINITY);

        let radial: Vec<_> = pts.iter().map(|&p| rec(p * 1.1, p)).collect();
        assert!((compute_evm(&radial).unwrap() - 10.0).abs() < 1e-9);
        assert!((compute_mer(&radial).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(compute_evm(&[]), Err(MetricsError::EmptyInput));
        assert_eq!(compute_mer(&[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn per_counts_header_and_payload_failures() {
        let good = build_frame(&[1, 2, 3], 2).unwrap().serialize();
        let mut bad_payload = good.clone();
        bad_payload.flip(good.len() - 20);
        let mut bad_header = good.clone();
        bad_header.flip(70);
        let frames = vec![
            parse_frame(good.bits()),
            parse_frame(bad_payload.bits()),
            parse_frame(bad_header.bits()),
        ];
        assert_eq!(compute_per(&frames[..1]), (0, 1, 0.0));
        assert_eq!(compute_per(&frames[..2]), (1, 2, 0.5));
        assert_eq!(compute_per(&frames).0, 2);
        let (e, t, r) = compute_per(&[]);
        assert_eq!((e, t), (0, 0));
        assert!(r.is_nan());
    }

    #[test]
    fn merge_matches_single_pass() {
        let a: Vec<_> = (0..10)
            .map(|i| {
                rec(
                    Complex64::new(1.0 + 0.01 * i as f64, 0.0),
                    Complex64::new(1.0, 0.0),
                )
            })
            .collect();
        let b: Vec<_> = (0..7)
            .map(|i| {
                rec(
                    Complex64::new(-1.0, 0.02 * i as f64),
                    Complex64::new(-1.0, 0.0),
                )
            })
            .collect();
        let ra =
            MetricsReport::from_counts((1, 20, 0.0), (1, 10, 0.0), (0, 1, 0.0), &a, 500.0, 0.6);
        let rb = MetricsReport::from_counts((2, 14, 0.0), (1, 7, 0.0), (1, 1, 0.0), &b, 500.0, 0.6);
        let mut m = ra.clone();
        m.merge(&rb);
        let all: Vec<_> = a.iter().chain(&b).copied().collect();
        assert_eq!(m.bit_errors, 3);
        assert_eq!(m.per, 0.5);
        assert!((m.mer_db - compute_mer(&all).unwrap()).abs() < 1e-9);
        assert!((m.evm_rms_pct - compute_evm(&all).unwrap()).abs() < 1e-9);
        assert!((m.mer_db + 20.0 * (m.evm_rms_pct / 100.0).log10()).abs() < 1e-9);
        let mut rev = rb.clone();
        rev.merge(&ra);
        assert_eq!(rev.bit_errors, m.bit_errors);
        assert!((rev.mer_db - m.mer_db).abs() < 1e-12);
    }
}
