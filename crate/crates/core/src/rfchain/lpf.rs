use std::f64::consts::PI;

use num_complex::Complex64;

use super::RfError;
use crate::modem::IqBlock;

pub const LPF_TAPS: usize = 129;

/// Linear-phase windowed-sinc low-pass filter (Hamming window), applied
/// identically to the I and Q paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpfSpec {
    pub cutoff_hz: f64,
}

impl LpfSpec {
    pub fn new(cutoff_hz: f64) -> Self {
        Self { cutoff_hz }
    }

    /// Delay of the filter in samples.
    pub fn group_delay(&self) -> usize {
        (LPF_TAPS - 1) / 2
    }

    /// Taps normalized to unit DC gain.
    pub fn design(&self, sample_rate_hz: f64) -> Result<Vec<f64>, RfError> {
        let nyquist = sample_rate_hz / 2.0;
        if !(self.cutoff_hz > 0.0 && self.cutoff_hz < nyquist) {
            return Err(RfError::CutoffAboveNyquist {
                cutoff_hz: self.cutoff_hz,
                nyquist_hz: nyquist,
            });
        }
        let fc = self.cutoff_hz / sample_rate_hz;
        let m = (LPF_TAPS - 1) as f64;
        let mut h: Vec<f64> = (0..LPF_TAPS)
            .map(|n| {
                let t = n as f64 - m / 2.0;
                let ideal = if t == 0.0 {
                    2.0 * fc
                } else {
                    (2.0 * PI * fc * t).sin() / (PI * t)
                };
                ideal * (0.54 - 0.46 * (2.0 * PI * n as f64 / m).cos())
            })
            .collect();
        let dc: f64 = h.iter().sum();
        h.iter_mut().for_each(|x| *x /= dc);
        Ok(h)
    }
}

/// Full convolution: the output is `LPF_TAPS - 1` samples longer than the
/// input and delayed by [`LpfSpec::group_delay`].
pub fn apply_lpf(block: &IqBlock, spec: &LpfSpec) -> Result<IqBlock, RfError> {
    let h = spec.design(block.sample_rate_hz())?;
    let x = block.samples();
    if x.is_empty() {
        return Ok(block.clone());
    }
    let len = x.len() + h.len() - 1;
    let out: Vec<Complex64> = (0..len)
        .map(|n| {
            let lo = n.saturating_sub(x.len() - 1);
            let hi = n.min(h.len() - 1);
            (lo..=hi).map(|k| x[n - k] * h[k]).sum()
        })
        .collect();
    Ok(block.with_samples(out))
}
