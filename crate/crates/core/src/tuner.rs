//! Minimum-power bias selection.
//!
//! Settings are tried from the lowest to the highest bias; the first one
//! whose metric meets the target at the requested confidence wins. Rate
//! targets use a one-sided Wilson bound, MER targets a one-sided t bound
//! over per-trial MER values.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::io::Scenario;
use crate::link::{Link, LinkError};
use crate::metrics::MetricsReport;
use crate::rfchain::{LnaBiasTable, RfError};
use crate::rng::derive_seed;
use crate::stats;

/// Trials behind every MER decision.
pub const MIN_MER_TRIALS: usize = 10;
/// Cap on bits spent resolving a BER target, as a multiple of `min_bits`.
pub const BER_ESCALATION_LIMIT: u64 = 64;

#[derive(Debug, Error)]
pub enum TunerError {
    #[error("no ladder setting meets the target:\n{trace}")]
    NoFeasibleSetting { trace: String },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Link(#[from] LinkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetMetric {
    Ber,
    Per,
    Mer,
}

impl fmt::Display for TargetMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ber => "ber",
            Self::Per => "per",
            Self::Mer => "mer",
        })
    }
}

impl FromStr for TargetMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ber" => Ok(Self::Ber),
            "per" => Ok(Self::Per),
            "mer" => Ok(Self::Mer),
            other => Err(format!(
                "unknown target metric '{other}' (expected ber, per or mer)"
            )),
        }
    }
}

/// Selection target. BER and PER thresholds are upper limits; MER is a
/// lower limit in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct TunerPolicy {
    pub target_metric: TargetMetric,
    pub threshold: f64,
    pub confidence: f64,
    pub min_bits: u64,
    pub max_packets: u64,
    pub master_seed: u64,
}

impl TunerPolicy {
    /// Policy with defaults: confidence 0.95, `min_bits = 10 / threshold`
    /// for BER, and `max_packets` equal to one burst of the scenario.
    pub fn new(target_metric: TargetMetric, threshold: f64, scenario: &Scenario) -> Self {
        let min_bits = match target_metric {
            TargetMetric::Ber if threshold > 0.0 => (10.0 / threshold).ceil() as u64,
            _ => 0,
        };
        Self {
            target_metric,
            threshold,
            confidence: 0.95,
            min_bits,
            max_packets: scenario.waveform.packets as u64,
            master_seed: scenario.seed,
        }
    }

    /// Parses `metric:threshold`, e.g. `ber:1e-3` or `mer:18`.
    pub fn parse_target(text: &str, scenario: &Scenario) -> Result<Self, String> {
        let (m, t) = text
            .split_once(':')
            .ok_or_else(|| format!("target '{text}' is not 'metric:threshold'"))?;
        let metric: TargetMetric = m.trim().parse()?;
        let threshold: f64 = t
            .trim()
            .parse()
            .map_err(|_| format!("cannot parse threshold '{t}'"))?;
        Ok(Self::new(metric, threshold, scenario))
    }

    pub fn validate(&self) -> Result<(), TunerError> {
        let bad = |m: String| Err(TunerError::InvalidPolicy(m));
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            ));
        }
        match self.target_metric {
            TargetMetric::Ber => {
                if !(self.threshold > 0.0 && self.threshold < 1.0) {
                    return bad(format!(
                        "BER threshold must lie in (0, 1), got {}",
                        self.threshold
                    ));
                }
                if (self.min_bits as f64) < 10.0 / self.threshold {
                    return bad(format!(
                        "min_bits {} cannot resolve BER {} (need >= {})",
                        self.min_bits,
                        self.threshold,
                        (10.0 / self.threshold).ceil()
                    ));
                }
            }
            TargetMetric::Per => {
                if !(0.0..1.0).contains(&self.threshold) {
                    return bad(format!(
                        "PER threshold must lie in [0, 1), got {}",
                        self.threshold
                    ));
                }
                if self.max_packets == 0 {
                    return bad("max_packets must be positive".into());
                }
            }
            TargetMetric::Mer => {
                if !self.threshold.is_finite() {
                    return bad("MER threshold must be finite".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunerResult {
    pub chosen_bias_ua: f64,
    pub chosen_power_mw: f64,
    /// Highest ladder power over the chosen power.
    pub reduction_factor: f64,
    /// One merged report per evaluated setting, lowest bias first.
    pub per_setting_reports: Vec<MetricsReport>,
    pub decision_trace: String,
}

/// One trial of the scenario at `bias_ua`.
pub fn run_trial(scenario: &Scenario, bias_ua: f64, seed: u64) -> Result<MetricsReport, LinkError> {
    Link::from_scenario(scenario)?.run_trial(bias_ua, seed)
}

pub fn power_mw(table: &LnaBiasTable, bias_ua: f64) -> Result<f64, RfError> {
    table.power_mw(bias_ua)
}

fn run_range(
    link: &Link,
    bias_ua: f64,
    master: u64,
    setting: u64,
    trials: std::ops::Range<u64>,
) -> Result<Vec<MetricsReport>, LinkError> {
    trials
        .into_par_iter()
        .map(|t| link.run_trial(bias_ua, derive_seed(master, &[setting, t])))
        .collect()
}

/// Evaluates every listed setting with `trials` trials each.
pub fn sweep(
    link: &Link,
    biases: &[f64],
    trials: usize,
    master: u64,
) -> Result<Vec<MetricsReport>, LinkError> {
    biases
        .iter()
        .map(|&b| {
            let setting = link.table().index_of(b)? as u64;
            link.run_trials(b, master, setting, trials)
        })
        .collect()
}

struct Verdict {
    feasible: bool,
    report: MetricsReport,
    note: String,
}

fn evaluate(
    link: &Link,
    policy: &TunerPolicy,
    bias: f64,
    setting: u64,
) -> Result<Verdict, LinkError> {
    let seed = policy.master_seed;
    let c = policy.confidence;
    let per_trial_bits = link.bits_per_trial() as u64;
    let per_trial_packets = link.scenario().waveform.packets as u64;
    let merged = |v: &[MetricsReport]| MetricsReport::merged(v).expect("at least one trial");
    match policy.target_metric {
        TargetMetric::Ber => {
            let mut trials = policy.min_bits.div_ceil(per_trial_bits).max(1);
            let cap = trials * BER_ESCALATION_LIMIT;
            let mut reports = run_range(link, bias, seed, setting, 0..trials)?;
            loop {
                let r = merged(&reports);
                let upper = stats::wilson_upper(r.bit_errors, r.bits_total, c);
                let lower = stats::wilson_lower(r.bit_errors, r.bits_total, c);
                let resolved = upper <= policy.threshold || lower > policy.threshold;
                if resolved || trials >= cap {
                    let note = format!(
                        "BER {:.3e} over {} bits, upper bound {:.3e}{}",
                        r.ber,
                        r.bits_total,
                        upper,
                        if resolved {
                            ""
                        } else {
                            " (unresolved at bit budget)"
                        }
                    );
                    return Ok(Verdict {
                        feasible: upper <= policy.threshold,
                        report: r,
                        note,
                    });
                }
                let more = trials.min(cap - trials);
                reports.extend(run_range(link, bias, seed, setting, trials..trials + more)?);
                trials += more;
            }
        }
        TargetMetric::Per => {
            let trials = policy.max_packets.div_ceil(per_trial_packets).max(1);
            let r = merged(&run_range(link, bias, seed, setting, 0..trials)?);
            let (feasible, note) = if policy.threshold == 0.0 {
                (
                    r.packet_errors == 0,
                    format!(
                        "{} packet errors in {} packets",
                        r.packet_errors, r.packets_total
                    ),
                )
            } else {
                let upper = stats::wilson_upper(r.packet_errors, r.packets_total, c);
                (
                    upper <= policy.threshold,
                    format!(
                        "PER {:.3e} over {} packets, upper bound {:.3e}",
                        r.per, r.packets_total, upper
                    ),
                )
            };
            Ok(Verdict {
                feasible,
                report: r,
                note,
            })
        }
        TargetMetric::Mer => {
            let reports = run_range(link, bias, seed, setting, 0..MIN_MER_TRIALS as u64)?;
            let samples: Vec<f64> = reports.iter().map(|r| r.mer_db).collect();
            let lower = stats::t_lower_bound(&samples, c).unwrap_or(f64::NEG_INFINITY);
            let r = merged(&reports);
            let note = format!(
                "MER {:.2} dB over {} trials, lower bound {:.2} dB",
                r.mer_db, MIN_MER_TRIALS, lower
            );
            Ok(Verdict {
                feasible: lower >= policy.threshold,
                report: r,
                note,
            })
        }
    }
}

/// Sweeps the ladder from low to high bias and returns the first setting
/// that meets `policy`.
pub fn select_min_power_with(link: &Link, policy: &TunerPolicy) -> Result<TunerResult, TunerError> {
    policy.validate()?;
    let table = link.table();
    let max_power = table.max_power_mw();
    let mut trace = String::new();
    let mut reports = Vec::new();
    for (i, bias) in table.settings().into_iter().enumerate() {
        let v = evaluate(link, policy, bias, i as u64)?;
        let _ = writeln!(
            trace,
            "{bias} uA: {} -> {}",
            v.note,
            if v.feasible { "feasible" } else { "fails" }
        );
        reports.push(v.report);
        if v.feasible {
            let power = table.power_mw(bias).map_err(LinkError::from)?;
            return Ok(TunerResult {
                chosen_bias_ua: bias,
                chosen_power_mw: power,
                reduction_factor: max_power / power,
                per_setting_reports: reports,
                decision_trace: trace,
            });
        }
    }
    Err(TunerError::NoFeasibleSetting { trace })
}

pub fn select_min_power(
    scenario: &Scenario,
    policy: &TunerPolicy,
) -> Result<TunerResult, TunerError> {
    select_min_power_with(&Link::from_scenario(scenario)?, policy)
}
