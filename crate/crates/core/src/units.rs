//! Unit conversions and physical constants shared by the signal chain.

/// Reference impedance for every voltage in the crate, in ohms.
pub const REFERENCE_OHMS: f64 = 50.0;

/// Thermal noise density `kT` at the 290 K reference temperature, in W/Hz.
pub const KT_290: f64 = 4.0039e-21;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_power_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn power_ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn db_to_amplitude_ratio(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Envelope mean-square amplitude (V²) that carries `watts` across the
/// reference impedance.
pub fn envelope_mean_square(watts: f64) -> f64 {
    2.0 * REFERENCE_OHMS * watts
}

/// Power in watts carried by an envelope of mean-square amplitude `ms` (V²).
pub fn envelope_power(ms: f64) -> f64 {
    ms / (2.0 * REFERENCE_OHMS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_round_trip() {
        for dbm in [-174.0, -100.0, 0.0, 5.0, 30.0] {
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-12);
        }
    }

    #[test]
    fn thermal_floor_is_minus_174_dbm_per_hz() {
        assert!((watts_to_dbm(KT_290) + 173.975).abs() < 0.01);
    }

    #[test]
    fn minus_100_dbm_rms_voltage() {
        // Passband RMS of an envelope is sqrt(mean|x|^2 / 2).
        let ms = envelope_mean_square(dbm_to_watts(-100.0));
        let rms = (ms / 2.0).sqrt();
        assert!((rms - 2.2360679e-6).abs() < 1e-12);
    }
}
