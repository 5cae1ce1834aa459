//! Bit-to-waveform and waveform-to-bit conversion.
//!
//! Transmit side: [`map_bits`] groups bits onto a unit-energy constellation and
//! [`Shaper::shape`] turns symbols into a sampled complex envelope. Receive
//! side: [`synchronize`] finds the burst start by correlating against the
//! modulated preamble, [`refine_lock`] tightens timing and phase over the
//! whole burst, then [`demodulate`] filters, samples, derotates, normalizes
//! and slices.

mod detect;
mod scheme;
mod shaping;
mod sync;

use num_complex::Complex64;
use thiserror::Error;

use crate::units;

pub use detect::{
    decide, demodulate, detector_outputs, refine_lock, signal_energy, Demodulated, Detector,
};
pub use scheme::{map_bits, Mapped, Modulation, ModulationScheme};
pub use shaping::{rrc_taps, PulseShape, Shaper, DEFAULT_ROLLOFF, DEFAULT_SPAN_SYMBOLS};
pub use sync::{synchronize, SyncResult, DEFAULT_SYNC_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModemError {
    #[error("sample rate must be positive, got {0}")]
    NonPositiveSampleRate(f64),
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("invalid shaping parameters: {0}")]
    InvalidShaping(String),
    #[error("block of {block} samples is shorter than the {replica}-sample preamble replica")]
    BlockTooShort { block: usize, replica: usize },
    #[error("no preamble found (peak-to-average {ratio:.2} below {threshold:.2})")]
    SyncNotFound { ratio: f64, threshold: f64 },
}

/// Uniformly sampled complex envelope, volts across the reference impedance.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBlock {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
    center_freq_hz: f64,
}

impl IqBlock {
    pub fn new(
        samples: Vec<Complex64>,
        sample_rate_hz: f64,
        center_freq_hz: f64,
    ) -> Result<Self, ModemError> {
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(ModemError::NonPositiveSampleRate(sample_rate_hz));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(ModemError::NonFiniteSample(i));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            center_freq_hz,
        })
    }

    /// Replaces the samples, keeping rate and carrier metadata.
    ///
    /// Panics if any new sample is non-finite; signal-chain stages only
    /// produce finite output from finite input.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        assert!(
            samples.iter().all(|s| s.re.is_finite() && s.im.is_finite()),
            "non-finite sample produced"
        );
        Self {
            samples,
            sample_rate_hz: self.sample_rate_hz,
            center_freq_hz: self.center_freq_hz,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn center_freq_hz(&self) -> f64 {
        self.center_freq_hz
    }

    pub fn set_center_freq_hz(&mut self, hz: f64) {
        self.center_freq_hz = hz;
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn mean_square(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn power_w(&self) -> f64 {
        units::envelope_power(self.mean_square())
    }

    pub fn power_dbm(&self) -> f64 {
        units::watts_to_dbm(self.power_w())
    }

    /// RMS voltage of the equivalent real passband signal.
    pub fn passband_rms(&self) -> f64 {
        (self.mean_square() / 2.0).sqrt()
    }
}

/// A detected symbol next to its ground-truth constellation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolRecord {
    pub index: usize,
    pub rx: Complex64,
    pub reference: Complex64,
}

/// Pairs detected points with the transmitted reference points.
pub fn symbol_records(rx: &[Complex64], reference: &[Complex64]) -> Vec<SymbolRecord> {
    rx.iter()
        .zip(reference)
        .enumerate()
        .map(|(index, (&rx, &reference))| SymbolRecord {
            index,
            rx,
            reference,
        })
        .collect()
}
