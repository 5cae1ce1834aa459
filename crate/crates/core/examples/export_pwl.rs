//! Writes circuit-simulator sources for every captured stage of one burst:
//! baseband I and Q, plus a short passband excerpt on a 10 MHz carrier.
//!
//! ```text
//! cargo run --example export_pwl -- OUT_DIR
//! ```

use std::path::Path;

use rfcosim::io::{export_pwl, import_pwl, PwlMode, Scenario};
use rfcosim::link::{Link, Stage};
use rfcosim::rng::derive_seed;

pub fn run(dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
    std::fs::create_dir_all(dir)?;
    let s = Scenario::table_i();
    let link = Link::from_scenario(&s)?;
    let seed = derive_seed(s.seed, &[0, 0]);
    for stage in Stage::ALL {
        let block = link.capture_stage(s.rx.bias_ua, seed, stage)?;
        for (mode, suffix) in [(PwlMode::BasebandI, "i"), (PwlMode::BasebandQ, "q")] {
            let path = dir.join(format!("{}_{suffix}.csv", stage.as_str()));
            let rows = export_pwl(&block, &path, mode, None)?;
            println!(
                "{:<32} {rows} rows, {:.1} dBm",
                path.display(),
                block.power_dbm()
            );
        }
    }

    let mut tx = link.capture_stage(s.rx.bias_ua, seed, Stage::Tx)?;
    tx = tx.with_samples(tx.samples()[..256].to_vec());
    tx.set_center_freq_hz(10e6);
    let path = dir.join("tx_passband.csv");
    let rows = export_pwl(&tx, &path, PwlMode::Passband, None)?;
    let back = import_pwl(&path)?;
    println!(
        "{:<32} {rows} rows at 160 MHz, last t = {:.3e} s",
        path.display(),
        back.rows.last().map_or(0.0, |r| r.0)
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "pwl_out".into());
    run(Path::new(&dir))
}
