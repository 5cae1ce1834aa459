use std::f64::consts::PI;

use num_complex::Complex64;

use super::{IqBlock, ModemError};
use crate::units;

pub const DEFAULT_ROLLOFF: f64 = 0.35;
pub const DEFAULT_SPAN_SYMBOLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    RootRaisedCosine {
        rolloff: f64,
    },
    /// Full-symbol rectangular (NRZ) pulse.
    Rectangular,
}

impl PulseShape {
    pub fn rolloff(&self) -> f64 {
        match self {
            Self::RootRaisedCosine { rolloff } => *rolloff,
            Self::Rectangular => 0.0,
        }
    }
}

/// Root-raised-cosine taps spanning `span_symbols` symbols, `span * sps + 1`
/// long, scaled so that the sum of squares equals `sps`.
pub fn rrc_taps(rolloff: f64, sps: usize, span_symbols: usize) -> Vec<f64> {
    let half = (span_symbols * sps / 2) as isize;
    let b = rolloff;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|n| {
            let t = n as f64 / sps as f64;
            if n == 0 {
                1.0 - b + 4.0 * b / PI
            } else if b > 0.0 && ((4.0 * b * t).abs() - 1.0).abs() < 1e-9 {
                b / 2f64.sqrt()
                    * ((1.0 + 2.0 / PI) * (PI / (4.0 * b)).sin()
                        + (1.0 - 2.0 / PI) * (PI / (4.0 * b)).cos())
            } else {
                ((PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos())
                    / (PI * t * (1.0 - (4.0 * b * t).powi(2)))
            }
        })
        .collect();
    let energy: f64 = taps.iter().map(|h| h * h).sum();
    let scale = (sps as f64 / energy).sqrt();
    taps.iter_mut().for_each(|h| *h *= scale);
    taps
}

/// Transmit pulse shaping at a fixed oversampling factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Shaper {
    pub sps: usize,
    pub shape: PulseShape,
    pub span_symbols: usize,
    pub symbol_rate_hz: f64,
    pub center_freq_hz: f64,
}

impl Shaper {
    pub fn new(
        sps: usize,
        shape: PulseShape,
        symbol_rate_hz: f64,
        center_freq_hz: f64,
    ) -> Result<Self, ModemError> {
        if sps < 2 {
            return Err(ModemError::InvalidShaping(format!(
                "sps must be >= 2, got {sps}"
            )));
        }
        if let PulseShape::RootRaisedCosine { rolloff } = shape {
            if !(0.0..=1.0).contains(&rolloff) {
                return Err(ModemError::InvalidShaping(format!(
                    "rolloff must lie in [0, 1], got {rolloff}"
                )));
            }
        }
        if !(symbol_rate_hz > 0.0 && symbol_rate_hz.is_finite()) {
            return Err(ModemError::InvalidShaping(format!(
                "symbol rate must be positive, got {symbol_rate_hz}"
            )));
        }
        Ok(Self {
            sps,
            shape,
            span_symbols: DEFAULT_SPAN_SYMBOLS,
            symbol_rate_hz,
            center_freq_hz,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.symbol_rate_hz * self.sps as f64
    }

    pub fn taps(&self) -> Vec<f64> {
        match self.shape {
            PulseShape::RootRaisedCosine { rolloff } => {
                rrc_taps(rolloff, self.sps, self.span_symbols)
            }
            PulseShape::Rectangular => vec![1.0; self.sps],
        }
    }

    /// Envelope amplitude whose shaped, unit-energy symbols carry `dbm`.
    pub fn amplitude_for_dbm(dbm: f64) -> f64 {
        units::envelope_mean_square(units::dbm_to_watts(dbm)).sqrt()
    }

    /// Shapes `symbols` into a block of `symbols.len() * sps + taps - 1`
    /// samples. Symbol `k` starts its pulse at sample `k * sps`.
    pub fn shape(&self, symbols: &[Complex64], amplitude: f64) -> IqBlock {
        let taps = self.taps();
        let len = if symbols.is_empty() {
            0
        } else {
            symbols.len() * self.sps + taps.len() - 1
        };
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (k, &s) in symbols.iter().enumerate() {
            let a = s * amplitude;
            let base = k * self.sps;
            for (j, &h) in taps.iter().enumerate() {
                out[base + j] += a * h;
            }
        }
        IqBlock::new(out, self.sample_rate_hz(), self.center_freq_hz)
            .expect("shaper parameters validated at construction")
    }
}
