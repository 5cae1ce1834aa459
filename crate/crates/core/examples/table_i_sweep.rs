//! The case study across the whole bias ladder: two QPSK packets per burst
//! at 20 dB SNR and -100 dBm.

use rfcosim::io::{render_metrics, Scenario};
use rfcosim::link::{Link, LinkError};
use rfcosim::tuner;

pub fn run(trials: usize) -> Result<(), LinkError> {
    let s = Scenario::table_i();
    let link = Link::from_scenario(&s)?;
    let reports = tuner::sweep(&link, &link.table().settings(), trials, s.seed)?;
    let text = render_metrics(&reports);
    // Only the summary table; the key-value block is for machines.
    for line in text.lines().filter(|l| l.starts_with('#')) {
        println!("{}", &line[2..]);
    }
    Ok(())
}

fn main() -> Result<(), LinkError> {
    run(10)
}
