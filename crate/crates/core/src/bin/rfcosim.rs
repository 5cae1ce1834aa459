use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use rfcosim::io::{self, IoError, PwlMode, Scenario};
use rfcosim::link::{resolve_table, Link, LinkError, Stage};
use rfcosim::metrics::MetricsReport;
use rfcosim::modem::SymbolRecord;
use rfcosim::rfchain::{calibrate_lna_table_with, RfError, DEFAULT_CALIBRATION_TRIALS};
use rfcosim::rng::derive_seed;
use rfcosim::tuner::{self, TunerError, TunerPolicy};

#[derive(Parser)]
#[command(
    name = "rfcosim",
    version,
    about = "Link-level RF front-end co-simulation"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario and write a report plus constellation CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Total packets; rounded up to whole bursts.
        #[arg(long)]
        packets: Option<usize>,
        #[arg(long)]
        bias: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate several bias settings.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "31.25,62.5,125,250,500")]
        bias_list: String,
        /// Bursts per setting.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pick the lowest-power setting meeting a target such as ber:1e-3.
    Tune {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long)]
        min_bits: Option<u64>,
        #[arg(long)]
        max_packets: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit LNA noise figures to MER targets such as "500:18.9,31.25:11.2".
    Calibrate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        targets: String,
        /// Starting ladder: shipped, placeholder or a table file.
        #[arg(long, default_value = "placeholder")]
        from: String,
        #[arg(long, default_value_t = DEFAULT_CALIBRATION_TRIALS)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one stage of a trial as a piece-wise linear CSV.
    ExportPwl {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        stage: String,
        #[arg(long, default_value = "baseband_i")]
        mode: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        bias: Option<f64>,
        /// Carrier for passband rendering; the simulation carrier is
        /// replaced to keep file sizes practical.
        #[arg(long, default_value_t = 10e6)]
        carrier_hz: f64,
        /// Passband sample rate (default 16 samples per carrier cycle).
        #[arg(long)]
        rate_hz: Option<f64>,
        /// Keep only the first N envelope samples.
        #[arg(long)]
        max_samples: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Config(String),
    Infeasible(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Infeasible(_) => 3,
            Self::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Infeasible(m) | Self::Io(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } => Self::Io(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<RfError> for CliError {
    fn from(e: RfError) -> Self {
        match e {
            RfError::CalibrationInfeasible(_) => Self::Infeasible(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<LinkError> for CliError {
    fn from(e: LinkError) -> Self {
        match e {
            LinkError::Io(io) => io.into(),
            LinkError::Rf(rf) => rf.into(),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<TunerError> for CliError {
    fn from(e: TunerError) -> Self {
        match e {
            TunerError::NoFeasibleSetting { .. } => Self::Infeasible(e.to_string()),
            TunerError::Link(l) => l.into(),
            other => Self::Config(other.to_string()),
        }
    }
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("cannot parse '{s}' as a number")))
        })
        .collect()
}

fn simulate(
    scenario: &Scenario,
    seed: u64,
    packets: usize,
    bias: f64,
    out: &Path,
) -> Result<(), CliError> {
    let link = Link::from_scenario(scenario)?;
    let per_burst = scenario.waveform.packets;
    let trials = packets.div_ceil(per_burst).max(1) as u64;
    let outputs = (0..trials)
        .into_par_iter()
        .map(|t| link.run_trial_detailed(bias, derive_seed(seed, &[0, t])))
        .collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<MetricsReport> = outputs.iter().map(|o| o.report.clone()).collect();
    let merged = MetricsReport::merged(&reports).expect("at least one trial");
    let mut records: Vec<SymbolRecord> = Vec::new();
    for o in &outputs {
        let base = records.len();
        records.extend(o.records.iter().map(|r| SymbolRecord {
            index: base + r.index,
            ..*r
        }));
    }
    out_dir(out)?;
    io::emit_report(&merged, &out.join("report.txt"))?;
    io::export_constellation(&records, &out.join("constellation.csv"))?;
    println!(
        "{bias} uA: BER {:.3e}  SER {:.3e}  EVM {:.2}%  MER {:.2} dB  PE {}/{}",
        merged.ber,
        merged.ser,
        merged.evm_rms_pct,
        merged.mer_db,
        merged.packet_errors,
        merged.packets_total
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate {
            scenario,
            seed,
            packets,
            bias,
            out,
        } => {
            let s = io::load_scenario(&scenario)?;
            let packets = packets.unwrap_or(s.waveform.packets);
            simulate(
                &s,
                seed.unwrap_or(s.seed),
                packets,
                bias.unwrap_or(s.rx.bias_ua),
                &out,
            )
        }
        Command::Sweep {
            scenario,
            bias_list,
            trials,
            out,
        } => {
            let s = io::load_scenario(&scenario)?;
            let link = Link::from_scenario(&s)?;
            let reports = tuner::sweep(&link, &parse_list(&bias_list)?, trials.max(1), s.seed)?;
            out_dir(&out)?;
            io::emit_report(&reports, &out.join("sweep.txt"))?;
            print!(
                "{}",
                io::render_metrics(&reports)
                    .split("\n\n")
                    .nth(1)
                    .unwrap_or("")
            );
            Ok(())
        }
        Command::Tune {
            scenario,
            target,
            confidence,
            min_bits,
            max_packets,
            out,
        } => {
            let s = io::load_scenario(&scenario)?;
            let mut policy = TunerPolicy::parse_target(&target, &s).map_err(CliError::Config)?;
            policy.confidence = confidence;
            if let Some(b) = min_bits {
                policy.min_bits = b;
            }
            if let Some(p) = max_packets {
                policy.max_packets = p;
            }
            let result = tuner::select_min_power(&s, &policy)?;
            out_dir(&out)?;
            io::emit_report(&result, &out.join("tune.txt"))?;
            print!("{}", result.decision_trace);
            println!(
                "chosen {} uA ({} mW), reduction factor {}",
                result.chosen_bias_ua, result.chosen_power_mw, result.reduction_factor
            );
            Ok(())
        }
        Command::Calibrate {
            scenario,
            targets,
            from,
            trials,
            out,
        } => {
            let s = io::load_scenario(&scenario)?;
            let start = match from.as_str() {
                "shipped" => resolve_table(&io::LnaTableSource::Shipped)?,
                "placeholder" => resolve_table(&io::LnaTableSource::Placeholder)?,
                path => io::load_lna_table(Path::new(path))?,
            };
            let pairs = targets
                .split(',')
                .map(|t| {
                    let (b, m) = t.split_once(':').ok_or_else(|| {
                        CliError::Config(format!("target '{t}' is not 'bias:mer'"))
                    })?;
                    let v = parse_list(&format!("{b},{m}"))?;
                    Ok((v[0], v[1]))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let report = calibrate_lna_table_with(&pairs, &s, &start, trials)?;
            io::save_lna_table(&report.table, &out)?;
            for a in &report.anchors {
                println!(
                    "{} uA: NF {} dB -> MER {:.3} dB (target {})",
                    a.bias_ua, a.nf_db, a.achieved_mer_db, a.target_mer_db
                );
            }
            Ok(())
        }
        Command::ExportPwl {
            scenario,
            stage,
            mode,
            seed,
            bias,
            carrier_hz,
            rate_hz,
            max_samples,
            out,
        } => {
            let s = io::load_scenario(&scenario)?;
            let stage: Stage = stage.parse().map_err(CliError::Config)?;
            let mode: PwlMode = mode.parse().map_err(CliError::Config)?;
            let link = Link::from_scenario(&s)?;
            let seed = derive_seed(seed.unwrap_or(s.seed), &[0, 0]);
            let mut block = link.capture_stage(bias.unwrap_or(s.rx.bias_ua), seed, stage)?;
            if let Some(n) = max_samples {
                let kept = block.samples()[..n.min(block.len())].to_vec();
                block = block.with_samples(kept);
            }
            block.set_center_freq_hz(carrier_hz);
            let rows = io::export_pwl(&block, &out, mode, rate_hz)?;
            println!("wrote {rows} rows to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
