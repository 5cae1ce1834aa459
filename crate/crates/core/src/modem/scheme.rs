use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::framing::{BitStream, ModulationCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Ook,
}

impl Modulation {
    pub fn code(self) -> ModulationCode {
        match self {
            Self::Bpsk => ModulationCode::Bpsk,
            Self::Qpsk => ModulationCode::Qpsk,
            Self::Ook => ModulationCode::Ook,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bpsk => "bpsk",
            Self::Qpsk => "qpsk",
            Self::Ook => "ook",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Self::Bpsk),
            "qpsk" => Ok(Self::Qpsk),
            "ook" => Ok(Self::Ook),
            other => Err(format!(
                "unsupported modulation '{other}' (expected bpsk, qpsk or ook)"
            )),
        }
    }
}

/// A constellation with unit average energy.
///
/// `points[i]` carries the bit pattern `i`, most significant bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationScheme {
    pub kind: Modulation,
    pub bits_per_symbol: usize,
    pub points: Vec<Complex64>,
}

impl ModulationScheme {
    pub fn new(kind: Modulation) -> Self {
        let points = match kind {
            Modulation::Bpsk => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            // Gray map: first bit picks the I sign, second the Q sign.
            Modulation::Qpsk => vec![
                Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
                Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
            ],
            Modulation::Ook => vec![Complex64::new(0.0, 0.0), Complex64::new(SQRT_2, 0.0)],
        };
        let bits_per_symbol = match kind {
            Modulation::Qpsk => 2,
            _ => 1,
        };
        Self {
            kind,
            bits_per_symbol,
            points,
        }
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Index of the nearest constellation point.
    pub fn slice(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn push_bits(&self, index: usize, out: &mut BitStream) {
        for k in (0..self.bits_per_symbol).rev() {
            out.push((index >> k) & 1 == 1);
        }
    }
}

/// Symbols produced by [`map_bits`], and how many zero bits were appended.
#[derive(Debug, Clone, PartialEq)]
pub struct Mapped {
    pub symbols: Vec<Complex64>,
    pub indices: Vec<usize>,
    pub padded_bits: usize,
}

pub fn map_bits(bits: &BitStream, scheme: &ModulationScheme) -> Mapped {
    let k = scheme.bits_per_symbol;
    let padded_bits = (k - bits.len() % k) % k;
    let mut all = bits.bits().to_vec();
    all.extend(std::iter::repeat_n(false, padded_bits));
    let indices: Vec<usize> = all
        .chunks(k)
        .map(|c| c.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize))
        .collect();
    let symbols = indices.iter().map(|&i| scheme.points[i]).collect();
    Mapped {
        symbols,
        indices,
        padded_bits,
    }
}
