//! Lowest-power bias for several application targets.

use rfcosim::io::Scenario;
use rfcosim::tuner::{select_min_power, TunerError, TunerPolicy};

pub fn run() -> Result<(), TunerError> {
    let s = Scenario::table_i();
    for target in ["ber:1e-2", "ber:1e-4", "per:0", "mer:15", "mer:19.5"] {
        let policy = TunerPolicy::parse_target(target, &s).map_err(TunerError::InvalidPolicy)?;
        match select_min_power(&s, &policy) {
            Ok(r) => println!(
                "{target:<9} -> {:>6} uA, {:.4} mW, {}x below full bias",
                r.chosen_bias_ua, r.chosen_power_mw, r.reduction_factor
            ),
            Err(TunerError::NoFeasibleSetting { trace }) => {
                println!("{target:<9} -> infeasible");
                for line in trace.lines() {
                    println!("    {line}");
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn main() -> Result<(), TunerError> {
    run()
}
