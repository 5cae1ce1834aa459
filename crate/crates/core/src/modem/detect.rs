use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::{symbol_records, IqBlock, ModulationScheme, Shaper, SymbolRecord};
use crate::framing::BitStream;

/// Per-symbol detection filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    /// Correlate against the transmit pulse.
    MatchedFilter,
    /// Moving average over one symbol period centered on the pulse.
    IntegrateAndDump,
}

impl Detector {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MatchedFilter => "matched",
            Self::IntegrateAndDump => "integrate",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Detector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "matched" => Ok(Self::MatchedFilter),
            "integrate" => Ok(Self::IntegrateAndDump),
            other => Err(format!(
                "unknown detector '{other}' (expected matched or integrate)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    pub bits: BitStream,
    /// Derotated, energy-normalized points before slicing.
    pub points: Vec<Complex64>,
    pub decisions: Vec<usize>,
}

impl Demodulated {
    pub fn records(&self, reference: &[Complex64]) -> Vec<SymbolRecord> {
        symbol_records(&self.points, reference)
    }
}

/// Raw detector output for `n_symbols` symbols whose first pulse starts at
/// sample `timing`. Samples outside the block read as zero.
pub fn detector_outputs(
    block: &IqBlock,
    shaper: &Shaper,
    detector: Detector,
    timing: usize,
    n_symbols: usize,
) -> Vec<Complex64> {
    let y = block.samples();
    let taps = shaper.taps();
    let sps = shaper.sps;
    let at = |i: usize| y.get(i).copied().unwrap_or_default();
    (0..n_symbols)
        .map(|k| {
            let start = timing + k * sps;
            match detector {
                Detector::MatchedFilter => {
                    let acc: Complex64 = taps
                        .iter()
                        .enumerate()
                        .map(|(j, &h)| at(start + j) * h)
                        .sum();
                    acc / sps as f64
                }
                Detector::IntegrateAndDump => {
                    let first = start + (taps.len() - sps) / 2;
                    (first..first + sps).map(at).sum::<Complex64>() / sps as f64
                }
            }
        })
        .collect()
}

fn constant_envelope(scheme: &ModulationScheme) -> bool {
    let e = scheme.average_energy();
    scheme
        .points
        .iter()
        .all(|p| (p.norm_sqr() - e).abs() < 1e-12 * e)
}

/// Signal energy per symbol in `raw`, excluding noise where possible.
///
/// Constant-envelope schemes use the second/fourth moment estimator
/// `S = sqrt(2 M2^2 - M4)`; other schemes fall back to the total energy.
pub fn signal_energy(raw: &[Complex64], scheme: &ModulationScheme) -> f64 {
    if raw.is_empty() {
        return 0.0;
    }
    let n = raw.len() as f64;
    let m2 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
    if !constant_envelope(scheme) {
        return m2;
    }
    let m4 = raw.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / n;
    let d = 2.0 * m2 * m2 - m4;
    if d > 0.0 {
        d.sqrt()
    } else {
        m2
    }
}

/// Derotates by `phase`, scales the signal to the scheme's average energy
/// and slices.
pub fn decide(
    raw: &[Complex64],
    scheme: &ModulationScheme,
    phase: f64,
    energy: f64,
) -> Demodulated {
    let derotate = Complex64::from_polar(1.0, -phase);
    let scale = if energy > 0.0 {
        (scheme.average_energy() / energy).sqrt()
    } else {
        1.0
    };
    let points: Vec<Complex64> = raw.iter().map(|z| z * derotate * scale).collect();
    let decisions: Vec<usize> = points.iter().map(|&z| scheme.slice(z)).collect();
    let mut bits = BitStream::with_capacity(raw.len() * scheme.bits_per_symbol);
    for &d in &decisions {
        scheme.push_bits(d, &mut bits);
    }
    Demodulated {
        bits,
        points,
        decisions,
    }
}

/// Detects `n_symbols` symbols whose first pulse starts at sample `timing`.
pub fn demodulate(
    block: &IqBlock,
    shaper: &Shaper,
    scheme: &ModulationScheme,
    detector: Detector,
    timing: usize,
    phase: f64,
    n_symbols: usize,
) -> Demodulated {
    let raw = detector_outputs(block, shaper, detector, timing, n_symbols);
    let energy = signal_energy(&raw, scheme);
    decide(&raw, scheme, phase, energy)
}

/// Refines a coarse preamble lock using the whole burst.
///
/// Timing moves by at most one sample toward the lag with the most detector
/// output energy. The phase is then re-estimated over every symbol; the
/// coarse phase only picks among the constellation's rotational ambiguities.
pub fn refine_lock(
    block: &IqBlock,
    shaper: &Shaper,
    scheme: &ModulationScheme,
    detector: Detector,
    timing: usize,
    phase: f64,
    n_symbols: usize,
) -> (usize, f64) {
    let energy = |t: usize| {
        detector_outputs(block, shaper, detector, t, n_symbols)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
    };
    let mut best = timing;
    let mut best_e = energy(timing);
    for t in [timing.checked_sub(1), Some(timing + 1)]
        .into_iter()
        .flatten()
    {
        let e = energy(t);
        if e > best_e {
            best_e = e;
            best = t;
        }
    }
    let raw = detector_outputs(block, shaper, detector, best, n_symbols);
    (best, refine_phase(&raw, scheme, phase))
}

/// M-th power estimate for M-PSK, with the M-fold ambiguity resolved toward
/// `coarse`; decision-directed for other schemes.
fn refine_phase(raw: &[Complex64], scheme: &ModulationScheme, coarse: f64) -> f64 {
    let m = scheme.points.len() as i32;
    if constant_envelope(scheme) {
        let common = scheme.points[0].powi(m);
        let c: Complex64 = raw.iter().map(|z| z.powi(m)).sum::<Complex64>() / common;
        if c.norm() == 0.0 {
            return coarse;
        }
        let step = 2.0 * PI / m as f64;
        let base = c.arg() / m as f64;
        let k = ((coarse - base) / step).round();
        return base + k * step;
    }
    let coarse_points = decide(raw, scheme, coarse, signal_energy(raw, scheme));
    let c: Complex64 = coarse_points
        .points
        .iter()
        .zip(&coarse_points.decisions)
        .map(|(z, &d)| z * scheme.points[d].conj())
        .sum();
    if c.norm() > 0.0 {
        coarse + c.arg()
    } else {
        coarse
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{map_bits, Modulation, PulseShape};
    use crate::rng::rng_for;
    use crate::stats::q_function;
    use rand::Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::FRAC_PI_2;

    fn random_bits(n: usize, seed: u64) -> BitStream {
        let mut rng = rng_for(seed, &[]);
        (0..n).map(|_| rng.random::<bool>()).collect()
    }

    fn shaper(shape: PulseShape) -> Shaper {
        Shaper::new(8, shape, 62_500.0, 0.0).unwrap()
    }

    const RRC: PulseShape = PulseShape::RootRaisedCosine { rolloff: 0.35 };

    #[test]
    fn loopback_identity_all_schemes() {
        for kind in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Ook] {
            for shape in [RRC, PulseShape::Rectangular] {
                for det in [Detector::MatchedFilter, Detector::IntegrateAndDump] {
                    let scheme = ModulationScheme::new(kind);
                    let bits = random_bits(998, 1);
                    let m = map_bits(&bits, &scheme);
                    let s = shaper(shape);
                    let block = s.shape(&m.symbols, 3e-6);
                    let d = demodulate(&block, &s, &scheme, det, 0, 0.0, m.symbols.len());
                    assert_eq!(
                        &d.bits.bits()[..bits.len()],
                        bits.bits(),
                        "{kind} {shape:?} {det}"
                    );
                }
            }
        }
    }

    #[test]
    fn noiseless_matched_records_sit_on_constellation() {
        // Rectangular pulse with integrate-and-dump is an exact matched pair.
        let scheme = ModulationScheme::new(Modulation::Qpsk);
        let bits = random_bits(2000, 2);
        let m = map_bits(&bits, &scheme);
        let s = shaper(PulseShape::Rectangular);
        let block = s.shape(&m.symbols, 1.7);
        let d = demodulate(
            &block,
            &s,
            &scheme,
            Detector::IntegrateAndDump,
            0,
            0.0,
            m.symbols.len(),
        );
        for r in d.records(&m.symbols) {
            assert!((r.rx - r.reference).norm() < 1e-6);
        }
    }

    #[test]
    fn noiseless_rrc_records_limited_by_truncation() {
        let scheme = ModulationScheme::new(Modulation::Qpsk);
        let bits = random_bits(4000, 3);
        let m = map_bits(&bits, &scheme);
        let s = shaper(RRC);
        let block = s.shape(&m.symbols, 1.0);
        let d = demodulate(
            &block,
            &s,
            &scheme,
            Detector::MatchedFilter,
            0,
            0.0,
            m.symbols.len(),
        );
        let worst = d
            .records(&m.symbols)
            .iter()
            .map(|r| (r.rx - r.reference).norm())
            .fold(0.0, f64::max);
        assert!(worst < 0.05, "{worst}");
    }

    #[test]
    fn rotation_equivariance() {
        let scheme = ModulationScheme::new(Modulation::Qpsk);
        let bits = random_bits(600, 4);
        let m = map_bits(&bits, &scheme);
        let s = shaper(RRC);
        let block = s.shape(&m.symbols, 1.0);
        for step in 0..16 {
            let theta = -3.0 + step as f64 * 0.4;
            let rot = Complex64::from_polar(1.0, theta);
            let rotated = block.with_samples(block.samples().iter().map(|z| z * rot).collect());
            let d = demodulate(
                &rotated,
                &s,
                &scheme,
                Detector::MatchedFilter,
                0,
                theta,
                m.symbols.len(),
            );
            assert_eq!(d.bits, bits, "theta {theta}");
        }
    }

    #[test]
    fn awgn_ber_at_es_n0_10_db() {
        // Es/N0 = 10 dB on QPSK is Eb/N0 = 7 dB: BER = Q(sqrt(2 * 10^0.7)).
        let scheme = ModulationScheme::new(Modulation::Qpsk);
        let n_bits = 200_000;
        let bits = random_bits(n_bits, 5);
        let m = map_bits(&bits, &scheme);
        let s = shaper(RRC);
        let mut y = s.shape(&m.symbols, 1.0).into_samples();
        // Unit symbol energy spread over 8 samples: N0 per sample = 8 / 10.
        let sigma = (8.0 / 10.0 / 2.0f64).sqrt();
        let mut rng = rng_for(6, &[]);
        for z in y.iter_mut() {
            *z += Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * sigma;
        }
        let block = IqBlock::new(y, 500e3, 0.0).unwrap();
        let d = demodulate(
            &block,
            &s,
            &scheme,
            Detector::MatchedFilter,
            0,
            0.0,
            m.symbols.len(),
        );
        let errors = d
            .bits
            .bits()
            .iter()
            .zip(bits.bits())
            .filter(|(a, b)| a != b)
            .count();
        let p = q_function((2.0 * 10f64.powf(0.7)).sqrt());
        let expected = p * n_bits as f64;
        let sigma_k = (n_bits as f64 * p * (1.0 - p)).sqrt();
        assert!((p - 7.8e-4).abs() < 0.1e-4);
        assert!(
            (errors as f64 - expected).abs() < 3.0 * sigma_k,
            "{errors} errors vs {expected:.1} expected"
        );
    }

    fn noisy_burst(
        es_n0_db: f64,
        seed: u64,
    ) -> (Shaper, ModulationScheme, Vec<Complex64>, IqBlock) {
        let scheme = ModulationScheme::new(Modulation::Qpsk);
        let m = map_bits(&random_bits(2000, seed), &scheme);
        let s = shaper(RRC);
        let mut y = s.shape(&m.symbols, 1.0).into_samples();
        let sigma = (8.0 / 10f64.powf(es_n0_db / 10.0) / 2.0).sqrt();
        let mut rng = rng_for(seed, &[1]);
        for z in y.iter_mut() {
            *z += Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * sigma;
        }
        let block = IqBlock::new(y, 500e3, 0.0).unwrap();
        (s, scheme, m.symbols, block)
    }

    #[test]
    fn moment_energy_ignores_noise() {
        let (s, scheme, symbols, block) = noisy_burst(3.0, 7);
        let raw = detector_outputs(&block, &s, Detector::MatchedFilter, 0, symbols.len());
        let total = raw.iter().map(|z| z.norm_sqr()).sum::<f64>() / raw.len() as f64;
        let e = signal_energy(&raw, &scheme);
        assert!((total - 1.5).abs() < 0.1, "{total}");
        assert!((e - 1.0).abs() < 0.1, "{e}");
        // Non-constant-envelope schemes keep the total energy.
        let ook = ModulationScheme::new(Modulation::Ook);
        assert_eq!(signal_energy(&raw, &ook), total);
    }

    #[test]
    fn refine_lock_fixes_timing_and_phase() {
        let (s, scheme, symbols, block) = noisy_burst(6.0, 8);
        let theta = 0.3;
        let rot = Complex64::from_polar(1.0, theta);
        let mut y = vec![Complex64::new(0.0, 0.0); 5];
        y.extend(block.samples().iter().map(|z| z * rot));
        let block = block.with_samples(y);
        for coarse in [4, 5, 6] {
            let (t, p) = refine_lock(
                &block,
                &s,
                &scheme,
                Detector::MatchedFilter,
                coarse,
                theta + 0.2,
                symbols.len(),
            );
            assert_eq!(t, 5);
            assert!((p - theta).abs() < 0.02, "{p}");
        }
        // The coarse phase picks the quadrant: a lock 90 degrees off stays off.
        let (_, p) = refine_lock(
            &block,
            &s,
            &scheme,
            Detector::MatchedFilter,
            5,
            theta + FRAC_PI_2 + 0.1,
            symbols.len(),
        );
        assert!((p - theta - FRAC_PI_2).abs() < 0.02, "{p}");
    }
}
