//! Fits the LNA ladder's noise figures to the case-study MER endpoints and
//! prints the resulting table, ready to paste into the shipped constants.
//!
//! ```text
//! cargo run --release --example calibrate_ladder [-- OUT.table]
//! ```

use std::path::PathBuf;

use rfcosim::io::{render_lna_table, save_lna_table, Scenario};
use rfcosim::link::Link;
use rfcosim::rfchain::{calibrate_lna_table, LnaBiasTable};

pub fn run(out: Option<PathBuf>) -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::table_i();
    let targets = [(500.0, 18.9), (31.25, 11.2)];
    let report = calibrate_lna_table(&targets, &scenario, &LnaBiasTable::placeholder())?;

    for a in &report.anchors {
        println!(
            "{:>6} uA: NF {:.4} dB -> MER {:.3} dB (target {}, {} evaluations)",
            a.bias_ua, a.nf_db, a.achieved_mer_db, a.target_mer_db, a.evaluations
        );
    }
    println!("\n{}", render_lna_table(&report.table));

    // Check every setting on fresh seeds.
    let mut check = scenario.clone();
    check.seed = 1000;
    let link = Link::new(&check, report.table.clone())?;
    for (i, bias) in report.table.settings().into_iter().enumerate() {
        let r = link.run_trials(bias, check.seed, i as u64, 10)?;
        println!(
            "{bias:>6} uA: MER {:6.2} dB  BER {:.2e}  SER {:.2e}  PE {}/{}",
            r.mer_db, r.ber, r.ser, r.packet_errors, r.packets_total
        );
    }

    if let Some(out) = out {
        save_lna_table(&report.table, &out)?;
        println!("\nwrote {}", out.display());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(std::env::args().nth(1).map(PathBuf::from))
}
