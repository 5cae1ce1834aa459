use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{ini_entries, read_file, write_file, IoError};
use crate::channel::{ChannelProfile, Tap};
use crate::framing::DEFAULT_PAYLOAD_BYTES;
use crate::modem::{Detector, Modulation, PulseShape, DEFAULT_ROLLOFF};
use crate::rfchain::{LpfSpec, RfBlockParams};

/// Transmit waveform knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformConfig {
    pub modulation: Modulation,
    pub symbol_rate_hz: f64,
    pub sps: usize,
    pub pulse: PulseShape,
    pub detector: Detector,
    pub packets: usize,
    pub payload_bytes: usize,
    pub carrier_hz: f64,
}

impl WaveformConfig {
    pub fn rolloff(&self) -> f64 {
        self.pulse.rolloff()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.symbol_rate_hz * self.sps as f64
    }
}

/// Where the LNA bias ladder comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum LnaTableSource {
    Shipped,
    Placeholder,
    File(PathBuf),
}

impl LnaTableSource {
    fn render(&self) -> String {
        match self {
            Self::Shipped => "shipped".into(),
            Self::Placeholder => "placeholder".into(),
            Self::File(p) => p.display().to_string(),
        }
    }
}

/// Receiver configuration. With `front_end` off the link uses an ideal
/// receiver (no LNA, mixer or LPF).
#[derive(Debug, Clone, PartialEq)]
pub struct RxConfig {
    pub front_end: bool,
    pub bias_ua: f64,
    pub lna_table: LnaTableSource,
    pub mixer: RfBlockParams,
    pub lpf: LpfSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub waveform: WaveformConfig,
    pub channel: ChannelProfile,
    pub rx: RxConfig,
}

impl Scenario {
    /// The case study: two QPSK packets at 20 dB SNR and -100 dBm through
    /// the full front-end at 500 uA.
    pub fn table_i() -> Self {
        let carrier_hz = 2.4e9;
        let seed = 1;
        Self {
            seed,
            waveform: WaveformConfig {
                modulation: Modulation::Qpsk,
                symbol_rate_hz: 62_500.0,
                sps: 8,
                pulse: PulseShape::RootRaisedCosine {
                    rolloff: DEFAULT_ROLLOFF,
                },
                detector: Detector::MatchedFilter,
                packets: 2,
                payload_bytes: DEFAULT_PAYLOAD_BYTES,
                carrier_hz,
            },
            channel: ChannelProfile {
                seed,
                ..ChannelProfile::awgn(20.0, -100.0, carrier_hz)
            },
            rx: RxConfig {
                front_end: true,
                bias_ua: 500.0,
                lna_table: LnaTableSource::Shipped,
                mixer: RfBlockParams::default_mixer(),
                lpf: LpfSpec::new(60e3),
            },
        }
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let w = &self.waveform;
        if !(w.symbol_rate_hz > 0.0 && w.symbol_rate_hz.is_finite()) {
            return Err(IoError::validation("symbol_rate_hz", "must be positive"));
        }
        if w.sps < 2 {
            return Err(IoError::validation("sps", "must be at least 2"));
        }
        if let PulseShape::RootRaisedCosine { rolloff } = w.pulse {
            if !(0.0..=1.0).contains(&rolloff) {
                return Err(IoError::validation("rolloff", "must lie in [0, 1]"));
            }
        }
        if w.packets == 0 {
            return Err(IoError::validation("packets", "must be at least 1"));
        }
        if !(1..=crate::framing::MAX_PAYLOAD).contains(&w.payload_bytes) {
            return Err(IoError::validation("payload_bytes", "must lie in 1..=255"));
        }
        if !(w.carrier_hz > 0.0 && w.carrier_hz.is_finite()) {
            return Err(IoError::validation("carrier_hz", "must be positive"));
        }
        if self.channel.carrier_hz != w.carrier_hz {
            return Err(IoError::validation(
                "carrier_hz",
                "channel and waveform carriers differ",
            ));
        }
        self.channel
            .validate()
            .map_err(|e| IoError::validation("channel", e.to_string()))?;
        let rx = &self.rx;
        if !(rx.bias_ua > 0.0 && rx.bias_ua.is_finite()) {
            return Err(IoError::validation("bias_ua", "must be positive"));
        }
        rx.mixer
            .validate()
            .map_err(|e| IoError::validation("mixer", e.to_string()))?;
        let nyquist = w.sample_rate_hz() / 2.0;
        if !(rx.lpf.cutoff_hz > 0.0 && rx.lpf.cutoff_hz < nyquist) {
            return Err(IoError::validation(
                "lpf_cutoff_hz",
                format!("must lie in (0, {nyquist}) Hz"),
            ));
        }
        Ok(())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x}"))
}

fn fmt_taps(taps: &[Tap]) -> String {
    if taps.is_empty() {
        return "none".into();
    }
    taps.iter()
        .map(|t| format!("{}:{}:{}", t.delay_s, t.gain, t.doppler_hz))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Normalized text form; `parse_scenario(render_scenario(s)) == s`.
pub fn render_scenario(s: &Scenario) -> String {
    let w = &s.waveform;
    let c = &s.channel;
    let r = &s.rx;
    let mut out = String::new();
    let _ = writeln!(out, "seed = {}", s.seed);
    let _ = writeln!(out, "\n[waveform]");
    let _ = writeln!(out, "modulation = {}", w.modulation);
    let _ = writeln!(out, "symbol_rate_hz = {}", w.symbol_rate_hz);
    let _ = writeln!(out, "sps = {}", w.sps);
    match w.pulse {
        PulseShape::RootRaisedCosine { rolloff } => {
            let _ = writeln!(out, "pulse = rrc");
            let _ = writeln!(out, "rolloff = {rolloff}");
        }
        PulseShape::Rectangular => {
            let _ = writeln!(out, "pulse = rect");
        }
    }
    let _ = writeln!(out, "detector = {}", w.detector);
    let _ = writeln!(out, "packets = {}", w.packets);
    let _ = writeln!(out, "payload_bytes = {}", w.payload_bytes);
    let _ = writeln!(out, "carrier_hz = {}", w.carrier_hz);
    let _ = writeln!(out, "\n[channel]");
    let _ = writeln!(out, "snr_db = {}", c.snr_db);
    let _ = writeln!(out, "rx_power_dbm = {}", c.rx_power_dbm);
    let _ = writeln!(out, "distance_m = {}", fmt_opt(c.distance_m));
    let _ = writeln!(out, "tx_power_dbm = {}", fmt_opt(c.tx_power_dbm));
    let _ = writeln!(out, "taps = {}", fmt_taps(&c.taps));
    let _ = writeln!(out, "\n[rx]");
    let _ = writeln!(
        out,
        "front_end = {}",
        if r.front_end { "on" } else { "off" }
    );
    let _ = writeln!(out, "bias_ua = {}", r.bias_ua);
    let _ = writeln!(out, "lna_table = {}", r.lna_table.render());
    let _ = writeln!(out, "mixer_gain_db = {}", r.mixer.gain_db);
    let _ = writeln!(out, "mixer_nf_db = {}", r.mixer.nf_db);
    let _ = writeln!(out, "mixer_iip3_dbm = {}", r.mixer.iip3_dbm);
    let _ = writeln!(out, "lpf_cutoff_hz = {}", r.lpf.cutoff_hz);
    out
}

struct Value<'a> {
    key: &'a str,
    text: &'a str,
    line: usize,
    column: usize,
}

impl Value<'_> {
    fn bad(&self, message: impl Into<String>) -> IoError {
        IoError::Parse {
            line: self.line,
            column: self.column,
            message: format!("{}: {}", self.key, message.into()),
        }
    }

    fn num<T: FromStr>(&self) -> Result<T, IoError> {
        self.text
            .parse()
            .map_err(|_| self.bad(format!("cannot parse '{}' as a number", self.text)))
    }

    fn opt_f64(&self) -> Result<Option<f64>, IoError> {
        if self.text.eq_ignore_ascii_case("none") {
            Ok(None)
        } else {
            self.num().map(Some)
        }
    }

    fn flag(&self) -> Result<bool, IoError> {
        match self.text.to_ascii_lowercase().as_str() {
            "on" | "true" | "yes" => Ok(true),
            "off" | "false" | "no" => Ok(false),
            other => Err(IoError::validation(
                self.key,
                format!("expected on/off, got '{other}'"),
            )),
        }
    }

    fn taps(&self) -> Result<Vec<Tap>, IoError> {
        if self.text.eq_ignore_ascii_case("none") {
            return Ok(Vec::new());
        }
        self.text
            .split(',')
            .map(|t| {
                let parts: Vec<&str> = t.trim().split(':').collect();
                if parts.len() != 3 {
                    return Err(self.bad("taps are 'delay_s:gain:doppler_hz' separated by ','"));
                }
                let n = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| self.bad(format!("cannot parse '{s}' as a number")))
                };
                Ok(Tap::new(n(parts[0])?, n(parts[1])?, n(parts[2])?))
            })
            .collect()
    }
}

/// Parses scenario text. Keys left out take their [`Scenario::table_i`]
/// values; unknown or repeated keys are errors.
pub fn parse_scenario(text: &str) -> Result<Scenario, IoError> {
    let mut s = Scenario::table_i();
    let mut rolloff = DEFAULT_ROLLOFF;
    let mut rect = false;
    let mut seen = BTreeSet::new();
    for (section, key, text, line, column) in ini_entries(text)? {
        let v = Value {
            key: &key,
            text: &text,
            line,
            column,
        };
        if !seen.insert((section.clone(), key.clone())) {
            return Err(IoError::validation(
                &key,
                format!("repeated in [{section}]"),
            ));
        }
        match (section.as_str(), key.as_str()) {
            ("", "seed") => s.seed = v.num()?,
            ("waveform", "modulation") => {
                s.waveform.modulation = text
                    .parse()
                    .map_err(|e: String| IoError::validation(&key, e))?
            }
            ("waveform", "symbol_rate_hz") => s.waveform.symbol_rate_hz = v.num()?,
            ("waveform", "sps") => s.waveform.sps = v.num()?,
            ("waveform", "rolloff") => rolloff = v.num()?,
            ("waveform", "pulse") => {
                rect = match text.as_str() {
                    "rrc" => false,
                    "rect" => true,
                    other => {
                        return Err(IoError::validation(
                            &key,
                            format!("unknown pulse '{other}' (expected rrc or rect)"),
                        ))
                    }
                }
            }
            ("waveform", "detector") => {
                s.waveform.detector = text
                    .parse()
                    .map_err(|e: String| IoError::validation(&key, e))?
            }
            ("waveform", "packets") => s.waveform.packets = v.num()?,
            ("waveform", "payload_bytes") => s.waveform.payload_bytes = v.num()?,
            ("waveform", "carrier_hz") => s.waveform.carrier_hz = v.num()?,
            ("channel", "snr_db") => s.channel.snr_db = v.num()?,
            ("channel", "rx_power_dbm") => s.channel.rx_power_dbm = v.num()?,
            ("channel", "distance_m") => s.channel.distance_m = v.opt_f64()?,
            ("channel", "tx_power_dbm") => s.channel.tx_power_dbm = v.opt_f64()?,
            ("channel", "taps") => s.channel.taps = v.taps()?,
            ("rx", "front_end") => s.rx.front_end = v.flag()?,
            ("rx", "bias_ua") => s.rx.bias_ua = v.num()?,
            ("rx", "lna_table") => {
                s.rx.lna_table = match text.as_str() {
                    "shipped" => LnaTableSource::Shipped,
                    "placeholder" => LnaTableSource::Placeholder,
                    "" => return Err(IoError::validation(&key, "empty path")),
                    path => LnaTableSource::File(PathBuf::from(path)),
                }
            }
            ("rx", "mixer_gain_db") => s.rx.mixer.gain_db = v.num()?,
            ("rx", "mixer_nf_db") => s.rx.mixer.nf_db = v.num()?,
            ("rx", "mixer_iip3_dbm") => s.rx.mixer.iip3_dbm = v.num()?,
            ("rx", "lpf_cutoff_hz") => s.rx.lpf = LpfSpec::new(v.num()?),
            _ => {
                let name = if section.is_empty() {
                    key.clone()
                } else {
                    format!("{section}.{key}")
                };
                return Err(IoError::validation(&name, "unknown key"));
            }
        }
    }
    s.waveform.pulse = if rect {
        PulseShape::Rectangular
    } else {
        PulseShape::RootRaisedCosine { rolloff }
    };
    s.channel.carrier_hz = s.waveform.carrier_hz;
    s.channel.seed = s.seed;
    s.validate()?;
    Ok(s)
}

/// Loads a scenario; a relative `lna_table` path resolves against the
/// scenario file's directory.
pub fn load_scenario(path: &Path) -> Result<Scenario, IoError> {
    let mut s = parse_scenario(&read_file(path)?)?;
    if let LnaTableSource::File(p) = &s.rx.lna_table {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                s.rx.lna_table = LnaTableSource::File(dir.join(p));
            }
        }
    }
    Ok(s)
}

pub fn save_scenario(s: &Scenario, path: &Path) -> Result<(), IoError> {
    write_file(path, &render_scenario(s))
}
