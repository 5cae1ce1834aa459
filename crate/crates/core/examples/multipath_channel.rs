//! Channel impairments at the case-study operating point: distance-derived
//! received power and a two-ray tapped delay line with Doppler.

use rfcosim::channel::{path_loss_db, Tap};
use rfcosim::io::Scenario;
use rfcosim::link::{Link, LinkError};

fn report(label: &str, s: &Scenario, trials: usize) -> Result<(), LinkError> {
    let r = Link::from_scenario(s)?.run_trials(s.rx.bias_ua, s.seed, 0, trials)?;
    println!(
        "{label:<34} rx {:>7.2} dBm  MER {:>6.2} dB  BER {:.2e}  PE {}/{}",
        s.channel.received_power_dbm()?,
        r.mer_db,
        r.ber,
        r.packet_errors,
        r.packets_total
    );
    Ok(())
}

pub fn run(trials: usize) -> Result<(), LinkError> {
    let base = Scenario::table_i();
    report("flat, -100 dBm", &base, trials)?;

    let loss = path_loss_db(100.0, base.channel.carrier_hz)?;
    println!("free-space loss at 100 m, 2.4 GHz: {loss:.2} dB");
    let mut s = base.clone();
    s.channel.distance_m = Some(100.0);
    s.channel.tx_power_dbm = Some(-100.0 + loss);
    report("100 m from a matching transmitter", &s, trials)?;

    let symbol = 1.0 / base.waveform.symbol_rate_hz;
    for (label, taps) in [
        (
            "echo at 0.25 T, -10 dB",
            vec![Tap::new(0.0, 1.0, 0.0), Tap::new(0.25 * symbol, 0.316, 0.0)],
        ),
        (
            "echo at 1 T, -6 dB",
            vec![Tap::new(0.0, 1.0, 0.0), Tap::new(symbol, 0.5, 0.0)],
        ),
        ("single path, 2 Hz Doppler", vec![Tap::new(0.0, 1.0, 2.0)]),
    ] {
        let mut s = base.clone();
        s.channel.taps = taps;
        report(label, &s, trials)?;
    }
    Ok(())
}

fn main() -> Result<(), LinkError> {
    run(10)
}
