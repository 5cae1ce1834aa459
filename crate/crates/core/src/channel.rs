//! Propagation impairments applied to a transmitted block.
//!
//! The composition order is fixed: multipath, then path-loss scaling, then
//! AWGN. SNR is defined in-band over a caller-supplied noise bandwidth (the
//! symbol rate for the link), with the noise itself white across the whole
//! simulated band.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::modem::IqBlock;
use crate::units;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("block carries no signal power; cannot scale noise to a finite SNR")]
    ZeroSignal,
    #[error("{name} must be positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("tap delay {delay_s} s is not shorter than the {duration_s} s block")]
    DelayTooLarge { delay_s: f64, duration_s: f64 },
    #[error("invalid channel profile: {0}")]
    InvalidProfile(String),
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_s: f64,
    pub gain: f64,
    pub doppler_hz: f64,
}

impl Tap {
    pub fn new(delay_s: f64, gain: f64, doppler_hz: f64) -> Self {
        Self {
            delay_s,
            gain,
            doppler_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    /// In-band SNR at the receiver input; `+inf` disables noise.
    pub snr_db: f64,
    pub rx_power_dbm: f64,
    /// When set together with `tx_power_dbm`, the received power follows
    /// from free-space loss instead of `rx_power_dbm`.
    pub distance_m: Option<f64>,
    pub tx_power_dbm: Option<f64>,
    pub carrier_hz: f64,
    /// Empty means a flat, unit channel.
    pub taps: Vec<Tap>,
    pub seed: u64,
}

impl ChannelProfile {
    pub fn awgn(snr_db: f64, rx_power_dbm: f64, carrier_hz: f64) -> Self {
        Self {
            snr_db,
            rx_power_dbm,
            distance_m: None,
            tx_power_dbm: None,
            carrier_hz,
            taps: Vec::new(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.snr_db.is_nan() {
            return Err(ChannelError::InvalidProfile("snr_db is NaN".into()));
        }
        if !self.rx_power_dbm.is_finite() {
            return Err(ChannelError::InvalidProfile(
                "rx_power_dbm must be finite".into(),
            ));
        }
        for t in &self.taps {
            if !(t.delay_s >= 0.0 && t.delay_s.is_finite()) {
                return Err(ChannelError::InvalidProfile(format!(
                    "tap delay must be >= 0, got {}",
                    t.delay_s
                )));
            }
            if !t.gain.is_finite() || !t.doppler_hz.is_finite() {
                return Err(ChannelError::InvalidProfile(
                    "tap values must be finite".into(),
                ));
            }
        }
        match (self.distance_m, self.tx_power_dbm) {
            (Some(d), Some(_)) => {
                path_loss_db(d, self.carrier_hz)?;
            }
            (Some(_), None) => {
                return Err(ChannelError::InvalidProfile(
                    "distance_m needs tx_power_dbm to derive the received power".into(),
                ))
            }
            _ => {}
        }
        Ok(())
    }

    /// Power at the receiver input before noise.
    pub fn received_power_dbm(&self) -> Result<f64, ChannelError> {
        match (self.distance_m, self.tx_power_dbm) {
            (Some(d), Some(tx)) => Ok(tx - path_loss_db(d, self.carrier_hz)?),
            _ => Ok(self.rx_power_dbm),
        }
    }

    /// Power the transmitter emits; equals the received power when no
    /// distance is modelled.
    pub fn transmit_power_dbm(&self) -> f64 {
        match (self.distance_m, self.tx_power_dbm) {
            (Some(_), Some(tx)) => tx,
            _ => self.rx_power_dbm,
        }
    }
}

/// Free-space path loss, `20 log10(4 pi d f / c)`.
pub fn path_loss_db(distance_m: f64, carrier_hz: f64) -> Result<f64, ChannelError> {
    if !(distance_m > 0.0) {
        return Err(ChannelError::NonPositiveInput {
            name: "distance_m",
            value: distance_m,
        });
    }
    if !(carrier_hz > 0.0) {
        return Err(ChannelError::NonPositiveInput {
            name: "carrier_hz",
            value: carrier_hz,
        });
    }
    Ok(20.0 * (4.0 * PI * distance_m * carrier_hz / units::SPEED_OF_LIGHT).log10())
}

/// Adds circular complex Gaussian noise so the in-band SNR over
/// `noise_bandwidth_hz` equals `snr_db`.
///
/// `signal_power_w` is the reference signal power; `None` measures the
/// block's mean power.
pub fn apply_awgn<R: Rng + ?Sized>(
    block: &IqBlock,
    snr_db: f64,
    noise_bandwidth_hz: f64,
    signal_power_w: Option<f64>,
    rng: &mut R,
) -> Result<IqBlock, ChannelError> {
    if snr_db == f64::INFINITY {
        return Ok(block.clone());
    }
    if !(noise_bandwidth_hz > 0.0) {
        return Err(ChannelError::NonPositiveInput {
            name: "noise_bandwidth_hz",
            value: noise_bandwidth_hz,
        });
    }
    let power = signal_power_w.unwrap_or_else(|| block.power_w());
    if !(power > 0.0) {
        return Err(ChannelError::ZeroSignal);
    }
    let density = power / (units::db_to_power_ratio(snr_db) * noise_bandwidth_hz);
    let variance = units::envelope_mean_square(density * block.sample_rate_hz());
    Ok(block.with_samples(add_noise(block.samples(), variance, rng)))
}

/// Adds complex Gaussian noise of total variance `variance` (V²) per sample.
pub(crate) fn add_noise<R: Rng + ?Sized>(
    x: &[Complex64],
    variance: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let sigma = (variance / 2.0).sqrt();
    x.iter()
        .map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(re, im) * sigma
        })
        .collect()
}

const INTERP_HALF_WIDTH: isize = 16;

fn blackman(t: f64, half: f64) -> f64 {
    if t.abs() >= half {
        return 0.0;
    }
    0.42 + 0.5 * (PI * t / half).cos() + 0.08 * (2.0 * PI * t / half).cos()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Delays `x` by `delay` samples (non-negative, possibly fractional) with a
/// windowed-sinc interpolator. Output keeps the input length.
pub(crate) fn fractional_delay(x: &[Complex64], delay: f64) -> Vec<Complex64> {
    let whole = delay.floor() as isize;
    let frac = delay - delay.floor();
    let n = x.len() as isize;
    let at = |i: isize| {
        if (0..n).contains(&i) {
            x[i as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    if frac < 1e-12 {
        return (0..n).map(|i| at(i - whole)).collect();
    }
    let half = INTERP_HALF_WIDTH as f64;
    let kernel: Vec<(isize, f64)> = (-INTERP_HALF_WIDTH + 1..=INTERP_HALF_WIDTH)
        .map(|m| {
            let t = m as f64 - frac;
            (m, sinc(t) * blackman(t, half))
        })
        .collect();
    (0..n)
        .map(|i| kernel.iter().map(|&(m, w)| at(i - whole - m) * w).sum())
        .collect()
}

/// Tapped delay line: `y(t) = sum_k g_k e^{j 2 pi nu_k t} x(t - tau_k)`.
pub fn apply_multipath(block: &IqBlock, taps: &[Tap]) -> Result<IqBlock, ChannelError> {
    if taps.is_empty() {
        return Ok(block.clone());
    }
    let fs = block.sample_rate_hz();
    let duration = block.duration_s();
    let mut out = vec![Complex64::new(0.0, 0.0); block.len()];
    for tap in taps {
        if tap.delay_s < 0.0 || tap.delay_s >= duration {
            return Err(ChannelError::DelayTooLarge {
                delay_s: tap.delay_s,
                duration_s: duration,
            });
        }
        let delayed = fractional_delay(block.samples(), tap.delay_s * fs);
        let w = 2.0 * PI * tap.doppler_hz / fs;
        for (n, (o, d)) in out.iter_mut().zip(delayed).enumerate() {
            *o += d * Complex64::from_polar(tap.gain, w * n as f64);
        }
    }
    Ok(block.with_samples(out))
}
