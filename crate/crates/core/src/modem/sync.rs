use num_complex::Complex64;

use super::{IqBlock, ModemError};

pub const DEFAULT_SYNC_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult {
    /// Sample index where the replica's first pulse starts.
    pub offset: usize,
    /// Angle of the correlation peak, radians.
    pub phase: f64,
    pub peak_to_average: f64,
}

/// Cross-correlates `block` against `replica` (the modulated preamble) over
/// lags `0..=max_lag` and returns the strongest alignment.
///
/// `max_lag = None` searches every lag where the replica fits.
pub fn synchronize(
    block: &IqBlock,
    replica: &[Complex64],
    max_lag: Option<usize>,
    threshold: f64,
) -> Result<SyncResult, ModemError> {
    let y = block.samples();
    if replica.is_empty() || y.len() < replica.len() {
        return Err(ModemError::BlockTooShort {
            block: y.len(),
            replica: replica.len(),
        });
    }
    let last = y.len() - replica.len();
    let last = max_lag.map_or(last, |m| m.min(last));
    let conj: Vec<Complex64> = replica.iter().map(|r| r.conj()).collect();

    let mut best = 0;
    let mut best_mag = -1.0;
    let mut best_c = Complex64::new(0.0, 0.0);
    let mut sum_mag = 0.0;
    for lag in 0..=last {
        let c: Complex64 = conj
            .iter()
            .zip(&y[lag..lag + conj.len()])
            .map(|(r, s)| r * s)
            .sum();
        let m = c.norm();
        sum_mag += m;
        if m > best_mag {
            best_mag = m;
            best = lag;
            best_c = c;
        }
    }
    let mean = sum_mag / (last + 1) as f64;
    let ratio = if mean > 0.0 { best_mag / mean } else { 0.0 };
    if !(ratio >= threshold) {
        return Err(ModemError::SyncNotFound { ratio, threshold });
    }
    Ok(SyncResult {
        offset: best,
        phase: best_c.arg(),
        peak_to_average: ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing;
    use crate::modem::{map_bits, Modulation, ModulationScheme, PulseShape, Shaper};
    use crate::rng::rng_for;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn setup() -> (Shaper, Vec<Complex64>, Vec<Complex64>) {
        let shaper = Shaper::new(
            8,
            PulseShape::RootRaisedCosine { rolloff: 0.35 },
            62_500.0,
            0.0,
        )
        .unwrap();
        let scheme = ModulationScheme::new(Modulation::Qpsk);
        let pre = map_bits(&framing::preamble(), &scheme).symbols;
        let replica = shaper.shape(&pre, 1.0).into_samples();
        let mut rng = rng_for(11, &[]);
        let data: framing::BitStream = (0..400).map(|_| rng.random::<bool>()).collect();
        let mut syms = pre.clone();
        syms.extend(map_bits(&data, &scheme).symbols);
        let tx = shaper.shape(&syms, 1.0).into_samples();
        (shaper, replica, tx)
    }

    fn delayed(tx: &[Complex64], delay: usize, rot: Complex64) -> IqBlock {
        let mut v = vec![Complex64::new(0.0, 0.0); delay];
        v.extend(tx.iter().map(|s| s * rot));
        v.extend(vec![Complex64::new(0.0, 0.0); 40]);
        IqBlock::new(v, 500e3, 0.0).unwrap()
    }

    #[test]
    fn finds_known_delay() {
        let (_, replica, tx) = setup();
        let r = synchronize(
            &delayed(&tx, 17, Complex64::new(1.0, 0.0)),
            &replica,
            None,
            4.0,
        )
        .unwrap();
        assert_eq!(r.offset, 17);
        // Tails of the following data symbols leak slightly into the window.
        assert!(r.phase.abs() < 1e-2, "{}", r.phase);
    }

    #[test]
    fn recovers_quarter_turn_at_20_db() {
        let (_, replica, tx) = setup();
        let mut block = delayed(&tx, 5, Complex64::new(0.0, 1.0)).into_samples();
        // In-band SNR 20 dB: per-sample noise variance = 8 * 0.01 for unit
        // symbol energy at 8 samples per symbol.
        let sigma = (8.0 * 0.01f64 / 2.0).sqrt();
        let mut rng = rng_for(5, &[]);
        for s in block.iter_mut() {
            let n = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            *s += n * sigma;
        }
        let r = synchronize(
            &IqBlock::new(block, 500e3, 0.0).unwrap(),
            &replica,
            None,
            4.0,
        )
        .unwrap();
        assert_eq!(r.offset, 5);
        assert!(
            (r.phase - std::f64::consts::FRAC_PI_2).abs() < 0.05,
            "{}",
            r.phase
        );
    }

    #[test]
    fn pure_noise_is_rejected() {
        let (_, replica, _) = setup();
        let mut rng = rng_for(99, &[]);
        let noise: Vec<Complex64> = (0..4000)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let err = synchronize(
            &IqBlock::new(noise, 500e3, 0.0).unwrap(),
            &replica,
            None,
            4.0,
        )
        .unwrap_err();
        assert!(matches!(err, ModemError::SyncNotFound { .. }));
    }

    #[test]
    fn short_block_is_an_error() {
        let (_, replica, _) = setup();
        let b = IqBlock::new(vec![Complex64::new(0.0, 0.0); 10], 1.0, 0.0).unwrap();
        assert!(matches!(
            synchronize(&b, &replica, None, 4.0),
            Err(ModemError::BlockTooShort { .. })
        ));
    }

    #[test]
    fn max_lag_limits_search() {
        let (_, replica, tx) = setup();
        let b = delayed(&tx, 100, Complex64::new(1.0, 0.0));
        let r = synchronize(&b, &replica, Some(150), 1.0).unwrap();
        assert_eq!(r.offset, 100);
        let r = synchronize(&b, &replica, Some(50), 0.0).unwrap();
        assert!(r.offset <= 50);
    }
}
