//! End-to-end link: frames in, scores out.
//!
//! One trial builds `packets` frames with random payloads, shapes them at
//! the transmit power, passes them through the channel and (optionally) the
//! LNA, mixer and LPF, then synchronizes on the first preamble and
//! demodulates the whole burst.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{self, ChannelError};
use crate::framing::{self, BitStream, FrameError};
use crate::io::{IoError, LnaTableSource, Scenario};
use crate::metrics::{self, MetricsError, MetricsReport};
use crate::modem::{self, IqBlock, ModemError, ModulationScheme, Shaper, SymbolRecord};
use crate::rfchain::{self, LnaBiasTable, RfError};
use crate::rng::{derive_seed, rng_for, stream};
use crate::units;

/// Silent symbols before and after the burst.
pub const LEAD_SYMBOLS: usize = 8;
pub const TRAIL_SYMBOLS: usize = 16;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Rf(#[from] RfError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("stage {0} is not present with the front-end disabled")]
    StageUnavailable(Stage),
}

/// Tap points along the receive chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Tx,
    PostChannel,
    PostLna,
    PostMixer,
    PostLpf,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Tx,
        Stage::PostChannel,
        Stage::PostLna,
        Stage::PostMixer,
        Stage::PostLpf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Tx => "tx",
            Self::PostChannel => "post-channel",
            Self::PostLna => "post-lna",
            Self::PostMixer => "post-mixer",
            Self::PostLpf => "post-lpf",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| {
                format!("unknown stage '{s}' (expected tx, post-channel, post-lna, post-mixer or post-lpf)")
            })
    }
}

/// Resolves a scenario's table source to a ladder.
pub fn resolve_table(source: &LnaTableSource) -> Result<LnaBiasTable, IoError> {
    match source {
        LnaTableSource::Shipped => Ok(LnaBiasTable::shipped()),
        LnaTableSource::Placeholder => Ok(LnaBiasTable::placeholder()),
        LnaTableSource::File(p) => crate::io::load_lna_table(p),
    }
}

/// Everything one trial produced.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub report: MetricsReport,
    pub records: Vec<SymbolRecord>,
    pub tx_bits: BitStream,
    pub rx_bits: BitStream,
    /// Whether the preamble correlation cleared the detection threshold.
    pub synced: bool,
    pub stages: Vec<(Stage, IqBlock)>,
}

/// A scenario bound to an LNA ladder, ready to run trials.
#[derive(Debug, Clone)]
pub struct Link {
    scenario: Scenario,
    table: LnaBiasTable,
    shaper: Shaper,
    scheme: ModulationScheme,
    replica: Vec<Complex64>,
}

impl Link {
    pub fn new(scenario: &Scenario, table: LnaBiasTable) -> Result<Self, LinkError> {
        scenario.validate()?;
        table.validate()?;
        let w = &scenario.waveform;
        let shaper = Shaper::new(w.sps, w.pulse, w.symbol_rate_hz, w.carrier_hz)?;
        let scheme = ModulationScheme::new(w.modulation);
        let pre = modem::map_bits(&framing::preamble(), &scheme);
        let replica = shaper.shape(&pre.symbols, 1.0).into_samples();
        Ok(Self {
            scenario: scenario.clone(),
            table,
            shaper,
            scheme,
            replica,
        })
    }

    /// Binds the scenario to the ladder named by its `lna_table` entry.
    pub fn from_scenario(scenario: &Scenario) -> Result<Self, LinkError> {
        let table = resolve_table(&scenario.rx.lna_table)?;
        Self::new(scenario, table)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &LnaBiasTable {
        &self.table
    }

    pub fn with_table(&self, table: LnaBiasTable) -> Result<Self, LinkError> {
        table.validate()?;
        Ok(Self {
            table,
            ..self.clone()
        })
    }

    /// Swaps the ladder without the monotonicity check; calibration probes
    /// one entry at a time.
    pub(crate) fn with_table_unchecked(&self, table: LnaBiasTable) -> Self {
        Self {
            table,
            ..self.clone()
        }
    }

    pub fn shaper(&self) -> &Shaper {
        &self.shaper
    }

    pub fn scheme(&self) -> &ModulationScheme {
        &self.scheme
    }

    /// Frame bits per trial.
    pub fn bits_per_trial(&self) -> usize {
        let w = &self.scenario.waveform;
        w.packets * (framing::OVERHEAD_BITS + 8 * w.payload_bytes)
    }

    /// Supply power for `bias_ua`; zero with the front-end disabled.
    pub fn power_mw(&self, bias_ua: f64) -> Result<f64, LinkError> {
        if self.scenario.rx.front_end {
            Ok(self.table.power_mw(bias_ua)?)
        } else {
            Ok(0.0)
        }
    }

    pub fn run_trial(&self, bias_ua: f64, seed: u64) -> Result<MetricsReport, LinkError> {
        Ok(self.simulate(bias_ua, seed, false)?.report)
    }

    pub fn run_trial_detailed(&self, bias_ua: f64, seed: u64) -> Result<TrialOutput, LinkError> {
        self.simulate(bias_ua, seed, true)
    }

    /// The block seen at `stage` in the trial with this seed.
    pub fn capture_stage(
        &self,
        bias_ua: f64,
        seed: u64,
        stage: Stage,
    ) -> Result<IqBlock, LinkError> {
        if !self.scenario.rx.front_end && stage > Stage::PostChannel {
            return Err(LinkError::StageUnavailable(stage));
        }
        let out = self.simulate(bias_ua, seed, true)?;
        Ok(out
            .stages
            .into_iter()
            .find(|(s, _)| *s == stage)
            .map(|(_, b)| b)
            .expect("all enabled stages are captured"))
    }

    /// Runs `trials` trials in parallel and merges them. Trial `t` uses the
    /// seed derived from `(master, setting_index, t)`.
    pub fn run_trials(
        &self,
        bias_ua: f64,
        master: u64,
        setting_index: u64,
        trials: usize,
    ) -> Result<MetricsReport, LinkError> {
        let reports: Vec<MetricsReport> = (0..trials as u64)
            .into_par_iter()
            .map(|t| self.run_trial(bias_ua, derive_seed(master, &[setting_index, t])))
            .collect::<Result<_, _>>()?;
        Ok(MetricsReport::merged(&reports).unwrap_or_else(|| {
            MetricsReport::empty(bias_ua, self.power_mw(bias_ua).unwrap_or(0.0))
        }))
    }

    fn random_payloads(&self, seed: u64) -> Vec<Vec<u8>> {
        let w = &self.scenario.waveform;
        let mut rng = rng_for(seed, &[stream::PAYLOAD]);
        (0..w.packets)
            .map(|_| (0..w.payload_bytes).map(|_| rng.random::<u8>()).collect())
            .collect()
    }

    fn simulate(&self, bias_ua: f64, seed: u64, capture: bool) -> Result<TrialOutput, LinkError> {
        let sc = &self.scenario;
        let w = &sc.waveform;
        let rx = &sc.rx;
        let fs = self.shaper.sample_rate_hz();
        let power_mw = self.power_mw(bias_ua)?;
        let lna = if rx.front_end {
            Some(self.table.lna_params(bias_ua)?.clone())
        } else {
            None
        };
        let mut stages = Vec::new();
        let mut keep = |stage: Stage, b: &IqBlock| {
            if capture {
                stages.push((stage, b.clone()));
            }
        };

        // Transmit.
        let code = w.modulation.code().code();
        let mut tx_bits = BitStream::new();
        for payload in self.random_payloads(seed) {
            tx_bits.extend_from(&framing::build_frame(&payload, code)?.serialize());
        }
        let mapped = modem::map_bits(&tx_bits, &self.scheme);
        let zero = Complex64::new(0.0, 0.0);
        let mut burst = vec![zero; LEAD_SYMBOLS];
        burst.extend_from_slice(&mapped.symbols);
        burst.extend(std::iter::repeat_n(zero, TRAIL_SYMBOLS));
        let tx_dbm = sc.channel.transmit_power_dbm();
        let tx = self.shaper.shape(&burst, Shaper::amplitude_for_dbm(tx_dbm));
        keep(Stage::Tx, &tx);

        // Channel.
        let rx_dbm = sc.channel.received_power_dbm()?;
        let faded = channel::apply_multipath(&tx, &sc.channel.taps)?;
        let loss = units::db_to_amplitude_ratio(rx_dbm - tx_dbm);
        let attenuated = faded.with_samples(faded.samples().iter().map(|s| s * loss).collect());
        let mut awgn_rng = rng_for(seed, &[stream::AWGN]);
        let mut y = channel::apply_awgn(
            &attenuated,
            sc.channel.snr_db,
            w.symbol_rate_hz,
            Some(units::dbm_to_watts(rx_dbm)),
            &mut awgn_rng,
        )?;
        keep(Stage::PostChannel, &y);

        // Front-end.
        let mut delay = 0;
        if let Some(lna) = &lna {
            y = rfchain::apply_block(&y, lna, fs, &mut rng_for(seed, &[stream::LNA]));
            keep(Stage::PostLna, &y);
            y = rfchain::apply_mixer(&y, &rx.mixer, fs, &mut rng_for(seed, &[stream::MIXER]));
            keep(Stage::PostMixer, &y);
            y = rfchain::apply_lpf(&y, &rx.lpf)?;
            delay = rx.lpf.group_delay();
            keep(Stage::PostLpf, &y);
        }

        // Receive. The search window stops half a frame in so the second
        // frame's preamble cannot win.
        let frame_samples =
            (framing::OVERHEAD_BITS + 8 * w.payload_bytes) * w.sps / self.scheme.bits_per_symbol;
        let max_lag = LEAD_SYMBOLS * w.sps + delay + frame_samples / 2;
        // A weak peak still gives the best timing guess, but the receiver
        // would not have detected the burst, so every packet counts as lost.
        let sync = modem::synchronize(&y, &self.replica, Some(max_lag), 0.0)?;
        let synced = sync.peak_to_average >= modem::DEFAULT_SYNC_THRESHOLD;
        let (timing, phase) = modem::refine_lock(
            &y,
            &self.shaper,
            &self.scheme,
            w.detector,
            sync.offset,
            sync.phase,
            mapped.symbols.len(),
        );
        let demod = modem::demodulate(
            &y,
            &self.shaper,
            &self.scheme,
            w.detector,
            timing,
            phase,
            mapped.symbols.len(),
        );

        let n_bits = tx_bits.len();
        let rx_bits = demod.bits.slice(0, n_bits);
        let bits = metrics::compute_ber(rx_bits.bits(), tx_bits.bits())?;
        let symbols = metrics::compute_ser(&demod.decisions, &mapped.indices)?;
        let records = demod.records(&mapped.symbols);
        let frame_bits = n_bits / w.packets;
        let parsed: Vec<_> = (0..w.packets)
            .map(|i| framing::parse_frame(&rx_bits.bits()[i * frame_bits..(i + 1) * frame_bits]))
            .collect();
        let mut packets = metrics::compute_per(&parsed);
        if !synced {
            packets = (packets.1, packets.1, 1.0);
        }
        let report =
            MetricsReport::from_counts(bits, symbols, packets, &records, bias_ua, power_mw);
        Ok(TrialOutput {
            report,
            records,
            tx_bits,
            rx_bits,
            synced,
            stages,
        })
    }
}
