use super::{RfBlockParams, RfError};

/// Binary-weighted bias settings in µA.
pub const DEFAULT_LADDER_UA: [f64; 5] = [31.25, 62.5, 125.0, 250.0, 500.0];
pub const DEFAULT_VDD_V: f64 = 1.2;

/// Endpoint guesses (bias µA, gain dB, NF dB, IIP3 dBm) used before
/// calibration; intermediate settings interpolate linearly in log2(bias).
const PLACEHOLDER_LOW: (f64, f64, f64, f64) = (31.25, 8.0, 12.0, -20.0);
const PLACEHOLDER_HIGH: (f64, f64, f64, f64) = (500.0, 18.0, 2.2, -10.0);

/// Output of `calibrate_lna_table` against the MER endpoints (500 µA ->
/// 18.9 dB, 31.25 µA -> 11.2 dB) at the default 20 dB / -100 dBm scenario.
/// Regenerate with `cargo run --release --example calibrate_ladder`.
const SHIPPED: [(f64, f64, f64, f64); 5] = [
    (31.25, 8.0, 14.1015625, -20.0),
    (62.5, 10.5, 11.279296875, -17.5),
    (125.0, 13.0, 8.45703125, -15.0),
    (250.0, 15.5, 5.634765625, -12.5),
    (500.0, 18.0, 2.8125, -10.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct LnaEntry {
    pub bias_ua: f64,
    pub params: RfBlockParams,
}

/// Discrete LNA bias ladder: each setting maps to block parameters, and
/// supply power is `bias * vdd`.
#[derive(Debug, Clone, PartialEq)]
pub struct LnaBiasTable {
    pub entries: Vec<LnaEntry>,
    pub vdd_v: f64,
}

fn entry(bias_ua: f64, gain_db: f64, nf_db: f64, iip3_dbm: f64) -> LnaEntry {
    LnaEntry {
        bias_ua,
        params: RfBlockParams::new(&format!("lna@{bias_ua}uA"), gain_db, nf_db, iip3_dbm),
    }
}

fn same_bias(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

impl LnaBiasTable {
    pub fn new(entries: Vec<LnaEntry>, vdd_v: f64) -> Result<Self, RfError> {
        let t = Self { entries, vdd_v };
        t.validate()?;
        Ok(t)
    }

    /// Uncalibrated ladder interpolated between the endpoint guesses.
    pub fn placeholder() -> Self {
        let (b0, g0, n0, i0) = PLACEHOLDER_LOW;
        let (b1, g1, n1, i1) = PLACEHOLDER_HIGH;
        let span = (b1 / b0).log2();
        let entries = DEFAULT_LADDER_UA
            .iter()
            .map(|&b| {
                let u = (b / b0).log2() / span;
                let lerp = |lo: f64, hi: f64| lo + u * (hi - lo);
                entry(b, lerp(g0, g1), lerp(n0, n1), lerp(i0, i1))
            })
            .collect();
        Self {
            entries,
            vdd_v: DEFAULT_VDD_V,
        }
    }

    /// The calibrated ladder that ships with the crate.
    pub fn shipped() -> Self {
        Self {
            entries: SHIPPED
                .iter()
                .map(|&(b, g, n, i)| entry(b, g, n, i))
                .collect(),
            vdd_v: DEFAULT_VDD_V,
        }
    }

    pub fn validate(&self) -> Result<(), RfError> {
        if self.entries.is_empty() {
            return Err(RfError::InvalidTable("ladder is empty".into()));
        }
        if !(self.vdd_v > 0.0 && self.vdd_v.is_finite()) {
            return Err(RfError::InvalidTable(format!(
                "vdd must be positive, got {}",
                self.vdd_v
            )));
        }
        for e in &self.entries {
            if !(e.bias_ua > 0.0 && e.bias_ua.is_finite()) {
                return Err(RfError::InvalidTable(format!(
                    "bias must be positive, got {}",
                    e.bias_ua
                )));
            }
            e.params.validate()?;
        }
        for w in self.entries.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            if hi.bias_ua <= lo.bias_ua {
                return Err(RfError::InvalidTable(format!(
                    "bias settings must strictly increase ({} then {})",
                    lo.bias_ua, hi.bias_ua
                )));
            }
            if hi.params.gain_db < lo.params.gain_db {
                return Err(RfError::InvalidTable(format!(
                    "gain falls from {} uA to {} uA",
                    lo.bias_ua, hi.bias_ua
                )));
            }
            if hi.params.nf_db > lo.params.nf_db {
                return Err(RfError::InvalidTable(format!(
                    "noise figure rises from {} uA to {} uA",
                    lo.bias_ua, hi.bias_ua
                )));
            }
        }
        Ok(())
    }

    pub fn settings(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.bias_ua).collect()
    }

    pub fn index_of(&self, bias_ua: f64) -> Result<usize, RfError> {
        self.entries
            .iter()
            .position(|e| same_bias(e.bias_ua, bias_ua))
            .ok_or_else(|| RfError::UnknownBiasSetting {
                requested: bias_ua,
                valid: self.settings(),
            })
    }

    pub fn lna_params(&self, bias_ua: f64) -> Result<&RfBlockParams, RfError> {
        Ok(&self.entries[self.index_of(bias_ua)?].params)
    }

    /// Supply power in mW: `bias_ua * vdd_v / 1000`.
    pub fn power_mw(&self, bias_ua: f64) -> Result<f64, RfError> {
        let e = &self.entries[self.index_of(bias_ua)?];
        Ok(e.bias_ua * self.vdd_v / 1000.0)
    }

    pub fn max_power_mw(&self) -> f64 {
        self.entries.iter().map(|e| e.bias_ua).fold(0.0, f64::max) * self.vdd_v / 1000.0
    }
}
