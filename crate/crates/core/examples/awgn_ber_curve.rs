//! Ideal receiver over AWGN: measured QPSK BER against Q(sqrt(2 Eb/N0)).

use rfcosim::io::Scenario;
use rfcosim::link::{Link, LinkError};
use rfcosim::stats::q_function;
use rfcosim::units::db_to_power_ratio;

pub fn run(trials: usize) -> Result<(), LinkError> {
    let mut s = Scenario::table_i();
    s.rx.front_end = false;
    println!(
        "{:>8} {:>11} {:>11} {:>9} {:>8}",
        "Eb/N0", "BER", "theory", "bits", "MER_dB"
    );
    for (i, ebn0) in [0.0, 2.0, 4.0, 6.0, 8.0].into_iter().enumerate() {
        // In-band SNR is Es/N0, two bits per QPSK symbol.
        s.channel.snr_db = ebn0 + 10.0 * 2f64.log10();
        let link = Link::from_scenario(&s)?;
        let r = link.run_trials(500.0, 7, i as u64, trials)?;
        let theory = q_function((2.0 * db_to_power_ratio(ebn0)).sqrt());
        println!(
            "{ebn0:>8.1} {:>11.3e} {theory:>11.3e} {:>9} {:>8.2}",
            r.ber, r.bits_total, r.mer_db
        );
    }
    Ok(())
}

fn main() -> Result<(), LinkError> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(24);
    run(trials)
}
