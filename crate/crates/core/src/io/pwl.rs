use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use super::{read_file, write_file, IoError};
use crate::modem::IqBlock;

const HEADER: &str = "time,value";
/// Default passband rate in samples per carrier cycle.
pub const SAMPLES_PER_CYCLE: f64 = 16.0;
const INTERP_HALF_WIDTH: isize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PwlMode {
    BasebandI,
    BasebandQ,
    Passband,
}

impl fmt::Display for PwlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BasebandI => "baseband_i",
            Self::BasebandQ => "baseband_q",
            Self::Passband => "passband",
        })
    }
}

impl FromStr for PwlMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseband_i" => Ok(Self::BasebandI),
            "baseband_q" => Ok(Self::BasebandQ),
            "passband" => Ok(Self::Passband),
            other => Err(format!(
                "unknown PWL mode '{other}' (expected baseband_i, baseband_q or passband)"
            )),
        }
    }
}

/// `(time_s, value_v)` rows with strictly increasing time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PwlWaveform {
    pub rows: Vec<(f64, f64)>,
    /// Non-fatal findings from import, e.g. an empty file.
    pub warnings: Vec<String>,
}

impl PwlWaveform {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Value at `t` by linear interpolation; held flat outside the rows.
    pub fn value_at(&self, t: f64) -> f64 {
        let r = &self.rows;
        match r.len() {
            0 => 0.0,
            _ if t <= r[0].0 => r[0].1,
            _ if t >= r[r.len() - 1].0 => r[r.len() - 1].1,
            _ => {
                let k = r.partition_point(|row| row.0 <= t);
                let (t0, v0) = r[k - 1];
                let (t1, v1) = r[k];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Resamples onto a uniform grid starting at the first row; the values
    /// land on the in-phase rail.
    pub fn to_block(&self, sample_rate_hz: f64, center_freq_hz: f64) -> Result<IqBlock, IoError> {
        if !(sample_rate_hz > 0.0) {
            return Err(IoError::validation("sample_rate_hz", "must be positive"));
        }
        let samples = match (self.rows.first(), self.rows.last()) {
            (Some(&(t0, _)), Some(&(t1, _))) => {
                let n = ((t1 - t0) * sample_rate_hz).floor() as usize + 1;
                (0..n)
                    .map(|i| Complex64::new(self.value_at(t0 + i as f64 / sample_rate_hz), 0.0))
                    .collect()
            }
            _ => Vec::new(),
        };
        IqBlock::new(samples, sample_rate_hz, center_freq_hz)
            .map_err(|e| IoError::validation("pwl", e.to_string()))
    }
}

/// CSV text with 9 significant digits per value.
pub fn write_pwl(rows: &[(f64, f64)]) -> String {
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for (t, v) in rows {
        let _ = writeln!(out, "{t:.8e},{v:.8e}");
    }
    out
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Real passband waveform `I cos(2 pi fc t) - Q sin(2 pi fc t)` sampled at
/// `rate_hz`, with I and Q reconstructed by Blackman-windowed sinc
/// interpolation. The rate must be at least four times the carrier plus the
/// one-sided simulated bandwidth.
pub fn passband_samples(block: &IqBlock, rate_hz: f64) -> Result<Vec<(f64, f64)>, IoError> {
    let fs = block.sample_rate_hz();
    let fc = block.center_freq_hz();
    let required = 4.0 * (fc + fs / 2.0);
    if !(rate_hz >= required) {
        return Err(IoError::RateTooLow {
            rate_hz,
            required_hz: required,
        });
    }
    let x = block.samples();
    let n_out = (block.duration_s() * rate_hz).round() as usize;
    let half = INTERP_HALF_WIDTH as f64;
    let at = |i: isize| {
        if i >= 0 && (i as usize) < x.len() {
            x[i as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let rows = (0..n_out)
        .map(|k| {
            let t = k as f64 / rate_hz;
            let pos = t * fs;
            let base = pos.floor() as isize;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut wsum = 0.0;
            for m in -INTERP_HALF_WIDTH + 1..=INTERP_HALF_WIDTH {
                let d = pos - (base + m) as f64;
                let w = sinc(d)
                    * (0.42 + 0.5 * (PI * d / half).cos() + 0.08 * (2.0 * PI * d / half).cos());
                acc += at(base + m) * w;
                wsum += w;
            }
            let env = acc / wsum;
            let ph = 2.0 * PI * fc * t;
            (t, env.re * ph.cos() - env.im * ph.sin())
        })
        .collect();
    Ok(rows)
}

/// Writes one rail of `block` (or its passband rendering) as PWL CSV and
/// returns the row count. `passband_rate_hz = None` uses 16 samples per
/// carrier cycle.
pub fn export_pwl(
    block: &IqBlock,
    path: &Path,
    mode: PwlMode,
    passband_rate_hz: Option<f64>,
) -> Result<usize, IoError> {
    let fs = block.sample_rate_hz();
    let rows: Vec<(f64, f64)> = match mode {
        PwlMode::BasebandI => block
            .samples()
            .iter()
            .enumerate()
            .map(|(i, s)| (i as f64 / fs, s.re))
            .collect(),
        PwlMode::BasebandQ => block
            .samples()
            .iter()
            .enumerate()
            .map(|(i, s)| (i as f64 / fs, s.im))
            .collect(),
        PwlMode::Passband => {
            let rate = passband_rate_hz.unwrap_or(SAMPLES_PER_CYCLE * block.center_freq_hz());
            passband_samples(block, rate)?
        }
    };
    write_file(path, &write_pwl(&rows))?;
    Ok(rows.len())
}

pub fn import_pwl(path: &Path) -> Result<PwlWaveform, IoError> {
    let text = read_file(path)?;
    let mut wf = PwlWaveform::default();
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        None => {
            wf.warnings.push("empty file".into());
            return Ok(wf);
        }
        Some((_, h)) if h.trim() == HEADER => {}
        Some((i, _)) => {
            return Err(IoError::Parse {
                line: i + 1,
                column: 1,
                message: format!("expected header '{HEADER}'"),
            })
        }
    }
    for (i, line) in lines {
        let (t, v) = line.split_once(',').ok_or_else(|| IoError::Parse {
            line: i + 1,
            column: 1,
            message: "expected 'time,value'".into(),
        })?;
        let num = |s: &str, column: usize| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| IoError::Parse {
                    line: i + 1,
                    column,
                    message: format!("'{}' is not a finite number", s.trim()),
                })
        };
        let time = num(t, 1)?;
        let value = num(v, t.len() + 2)?;
        if let Some(&(previous, _)) = wf.rows.last() {
            if time <= previous {
                return Err(IoError::NonMonotoneTime {
                    row: wf.rows.len() + 1,
                    time,
                    previous,
                });
            }
        }
        wf.rows.push((time, value));
    }
    if wf.rows.is_empty() {
        wf.warnings.push("header only, no samples".into());
    }
    Ok(wf)
}
