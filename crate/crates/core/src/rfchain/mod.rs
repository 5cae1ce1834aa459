//! Behavioral receive front-end.
//!
//! Each block adds input-referred thermal noise for its noise figure and then
//! applies a memoryless third-order envelope nonlinearity derived from its
//! gain and IIP3:
//!
//! ```text
//! y = a1 x - c3 |x|^2 x,   a1 = 10^(G/20),   c3 = a1 / A_iip3^2
//! ```
//!
//! where `A_iip3^2 = 2 R 10^((IIP3 - 30) / 10)` is the envelope amplitude of a
//! tone at the intercept power.

mod calibrate;
mod ladder;
mod lpf;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::channel::add_noise;
use crate::modem::IqBlock;
use crate::units;

pub use calibrate::{
    calibrate_lna_table, calibrate_lna_table_with, AnchorResult, CalibrationReport,
    DEFAULT_CALIBRATION_TRIALS, MER_TOLERANCE_DB,
};
pub use ladder::{LnaBiasTable, LnaEntry, DEFAULT_LADDER_UA, DEFAULT_VDD_V};
pub use lpf::{apply_lpf, LpfSpec, LPF_TAPS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RfError {
    #[error("bias {requested} uA is not a ladder setting; valid settings: {valid:?}")]
    UnknownBiasSetting { requested: f64, valid: Vec<f64> },
    #[error("invalid block parameters: {0}")]
    InvalidParams(String),
    #[error("invalid bias table: {0}")]
    InvalidTable(String),
    #[error("LPF cutoff {cutoff_hz} Hz is not below Nyquist ({nyquist_hz} Hz)")]
    CutoffAboveNyquist { cutoff_hz: f64, nyquist_hz: f64 },
    #[error("probe at {probe_dbm} dBm is within 20 dB of the {iip3_dbm} dBm IIP3")]
    ProbeTooStrong { probe_dbm: f64, iip3_dbm: f64 },
    #[error("calibration infeasible: {0}")]
    CalibrationInfeasible(String),
    #[error("calibration run failed: {0}")]
    Simulation(String),
}

/// Gain, noise figure and IIP3 of one front-end block.
#[derive(Debug, Clone, PartialEq)]
pub struct RfBlockParams {
    pub gain_db: f64,
    pub nf_db: f64,
    /// Input third-order intercept, dBm across 50 ohm. `+inf` is linear.
    pub iip3_dbm: f64,
    pub label: String,
}

impl RfBlockParams {
    pub fn new(label: &str, gain_db: f64, nf_db: f64, iip3_dbm: f64) -> Self {
        Self {
            gain_db,
            nf_db,
            iip3_dbm,
            label: label.to_string(),
        }
    }

    /// Noiseless, linear, unity-gain block.
    pub fn transparent(label: &str) -> Self {
        Self::new(label, 0.0, 0.0, f64::INFINITY)
    }

    /// The case-study mixer: 10 dB gain, 5 dBm IIP3, 10 dB NF.
    pub fn default_mixer() -> Self {
        Self::new("mixer", 10.0, 10.0, 5.0)
    }

    pub fn validate(&self) -> Result<(), RfError> {
        if !self.gain_db.is_finite() {
            return Err(RfError::InvalidParams(format!(
                "{}: gain must be finite",
                self.label
            )));
        }
        if !(self.nf_db >= 0.0 && self.nf_db.is_finite()) {
            return Err(RfError::InvalidParams(format!(
                "{}: noise figure must be >= 0 dB, got {}",
                self.label, self.nf_db
            )));
        }
        if self.iip3_dbm.is_nan() {
            return Err(RfError::InvalidParams(format!(
                "{}: IIP3 is NaN",
                self.label
            )));
        }
        Ok(())
    }

    pub fn noise_factor(&self) -> f64 {
        units::db_to_power_ratio(self.nf_db)
    }

    pub fn power_gain(&self) -> f64 {
        units::db_to_power_ratio(self.gain_db)
    }
}

/// Envelope nonlinearity coefficients `(a1, c3)`; `c3` is in V⁻².
pub fn nonlinear_coeff(params: &RfBlockParams) -> (f64, f64) {
    let a1 = units::db_to_amplitude_ratio(params.gain_db);
    if params.iip3_dbm == f64::INFINITY {
        return (a1, 0.0);
    }
    let a_iip3_sq = units::envelope_mean_square(units::dbm_to_watts(params.iip3_dbm));
    (a1, a1 / a_iip3_sq)
}

fn nonlinearity(x: &[Complex64], a1: f64, c3: f64) -> Vec<Complex64> {
    if c3 == 0.0 {
        return x.iter().map(|s| s * a1).collect();
    }
    // Past |x|^2 = a1 / (3 c3) the cubic turns over; hold its peak instead.
    let knee = a1 / (3.0 * c3);
    let peak = a1 * knee.sqrt() - c3 * knee * knee.sqrt();
    x.iter()
        .map(|&s| {
            let m2 = s.norm_sqr();
            if m2 <= knee {
                s * (a1 - c3 * m2)
            } else {
                s * (peak / m2.sqrt())
            }
        })
        .collect()
}

/// Noise (over `bandwidth_hz`) then nonlinearity.
pub fn apply_block<R: Rng + ?Sized>(
    block: &IqBlock,
    params: &RfBlockParams,
    bandwidth_hz: f64,
    rng: &mut R,
) -> IqBlock {
    let f = params.noise_factor();
    let noisy = if f > 1.0 {
        let variance = units::envelope_mean_square(units::KT_290 * (f - 1.0) * bandwidth_hz);
        add_noise(block.samples(), variance, rng)
    } else {
        block.samples().to_vec()
    };
    let (a1, c3) = nonlinear_coeff(params);
    block.with_samples(nonlinearity(&noisy, a1, c3))
}

/// [`apply_block`] with the noise source switched off.
pub fn apply_block_noiseless(block: &IqBlock, params: &RfBlockParams) -> IqBlock {
    let (a1, c3) = nonlinear_coeff(params);
    block.with_samples(nonlinearity(block.samples(), a1, c3))
}

/// Direct-conversion I/Q mixer. The envelope is already at baseband, so the
/// mixer reduces to a block with matched I and Q paths.
pub fn apply_mixer<R: Rng + ?Sized>(
    block: &IqBlock,
    params: &RfBlockParams,
    bandwidth_hz: f64,
    rng: &mut R,
) -> IqBlock {
    apply_block(block, params, bandwidth_hz, rng)
}

/// Friis cascade noise figure in dB. An empty chain is 0 dB.
pub fn cascade_nf_db(blocks: &[RfBlockParams]) -> f64 {
    let mut total = 1.0;
    let mut gain = 1.0;
    for (i, b) in blocks.iter().enumerate() {
        total += if i == 0 {
            b.noise_factor() - 1.0
        } else {
            (b.noise_factor() - 1.0) / gain
        };
        gain *= b.power_gain();
    }
    units::power_ratio_to_db(total)
}

pub fn cascade_gain_db(blocks: &[RfBlockParams]) -> f64 {
    blocks.iter().map(|b| b.gain_db).sum()
}

/// Two-tone intercept measurement through the noiseless block model.
///
/// Returns `+inf` when no IM3 product rises above the numerical floor.
pub fn measure_iip3(
    params: &RfBlockParams,
    tone_spacing_hz: f64,
    probe_power_dbm: f64,
) -> Result<f64, RfError> {
    if probe_power_dbm > params.iip3_dbm - 20.0 {
        return Err(RfError::ProbeTooStrong {
            probe_dbm: probe_power_dbm,
            iip3_dbm: params.iip3_dbm,
        });
    }
    if !(tone_spacing_hz > 0.0) {
        return Err(RfError::InvalidParams(
            "tone spacing must be positive".into(),
        ));
    }
    // Tones at +-spacing/2 and IM3 at +-3 spacing/2, all bin-centred.
    let n = 1024;
    let fs = 16.0 * tone_spacing_hz;
    let amp = units::envelope_mean_square(units::dbm_to_watts(probe_power_dbm)).sqrt();
    let f1 = -tone_spacing_hz / 2.0;
    let f2 = tone_spacing_hz / 2.0;
    let x: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            Complex64::from_polar(amp, 2.0 * PI * f1 * t)
                + Complex64::from_polar(amp, 2.0 * PI * f2 * t)
        })
        .collect();
    let block = IqBlock::new(x, fs, 0.0).map_err(|e| RfError::InvalidParams(e.to_string()))?;
    let y = apply_block_noiseless(&block, params);
    let tone_power = |f: f64| {
        let c: Complex64 = y
            .samples()
            .iter()
            .enumerate()
            .map(|(i, s)| s * Complex64::from_polar(1.0, -2.0 * PI * f * i as f64 / fs))
            .sum::<Complex64>()
            / n as f64;
        units::envelope_power(c.norm_sqr())
    };
    let fund = 0.5 * (tone_power(f1) + tone_power(f2));
    let im3 = 0.5 * (tone_power(2.0 * f1 - f2) + tone_power(2.0 * f2 - f1));
    if im3 <= fund * 1e-28 {
        return Ok(f64::INFINITY);
    }
    let delta_db = units::power_ratio_to_db(fund / im3);
    Ok(probe_power_dbm + delta_db / 2.0)
}
