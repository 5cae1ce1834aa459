//! Receiver budget per bias setting: cascade gain and noise figure (Friis),
//! two-tone IIP3 of each block and the LNA power draw.

use rfcosim::rfchain::{
    cascade_gain_db, cascade_nf_db, measure_iip3, LnaBiasTable, RfBlockParams, RfError,
};

pub fn run() -> Result<(), RfError> {
    let table = LnaBiasTable::shipped();
    let mixer = RfBlockParams::default_mixer();
    let mixer_iip3 = measure_iip3(&mixer, 10e3, mixer.iip3_dbm - 40.0)?;
    println!(
        "mixer: gain {} dB, NF {} dB, IIP3 {} dBm (two-tone {:.2})\n",
        mixer.gain_db, mixer.nf_db, mixer.iip3_dbm, mixer_iip3
    );
    println!(
        "{:>8} {:>8} {:>9} {:>9} {:>9} {:>10} {:>10}",
        "bias_uA", "P_mW", "LNA_G", "LNA_NF", "LNA_IIP3", "chain_G", "chain_NF"
    );
    for e in &table.entries {
        let chain = [e.params.clone(), mixer.clone()];
        let iip3 = measure_iip3(&e.params, 10e3, e.params.iip3_dbm - 40.0)?;
        println!(
            "{:>8} {:>8.4} {:>9.2} {:>9.3} {:>9.2} {:>10.2} {:>10.3}",
            e.bias_ua,
            table.power_mw(e.bias_ua)?,
            e.params.gain_db,
            e.params.nf_db,
            iip3,
            cascade_gain_db(&chain),
            cascade_nf_db(&chain)
        );
    }
    Ok(())
}

fn main() -> Result<(), RfError> {
    run()
}
