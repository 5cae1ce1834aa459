use super::{LnaBiasTable, RfError};
use crate::io::Scenario;
use crate::link::Link;

/// How close each calibrated setting must land to its MER target.
pub const MER_TOLERANCE_DB: f64 = 0.5;
/// Trials per MER evaluation; the case-study burst gives 2 packets each.
pub const DEFAULT_CALIBRATION_TRIALS: usize = 20;

const NF_MIN_DB: f64 = 0.0;
const NF_MAX_DB: f64 = 40.0;
const BISECTION_STEPS: usize = 40;
const STOP_DB: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorResult {
    pub bias_ua: f64,
    pub target_mer_db: f64,
    pub achieved_mer_db: f64,
    pub nf_db: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub table: LnaBiasTable,
    pub anchors: Vec<AnchorResult>,
    pub trials_per_evaluation: usize,
}

fn sim_err(e: impl std::fmt::Display) -> RfError {
    RfError::Simulation(e.to_string())
}

/// Mean MER over `trials` trials with the noise figure at `index` replaced.
/// Every call reuses the same seeds, so MER is a smooth function of NF.
fn mer_at(
    link: &Link,
    table: &LnaBiasTable,
    index: usize,
    nf_db: f64,
    trials: usize,
) -> Result<f64, RfError> {
    let mut t = table.clone();
    t.entries[index].params.nf_db = nf_db;
    // Monotonicity is enforced on the final ladder, not on probes.
    let link = link.with_table_unchecked(t);
    let bias = table.entries[index].bias_ua;
    let seed = link.scenario().seed;
    link.run_trials(bias, seed, index as u64, trials)
        .map(|r| r.mer_db)
        .map_err(sim_err)
}

/// Fits LNA noise figures so the end-to-end MER at each `(bias_ua, mer_db)`
/// target lands within [`MER_TOLERANCE_DB`], starting from `start`.
///
/// Targeted settings are found by bisection on NF. The remaining settings
/// are interpolated linearly in log2(bias) between calibrated settings, and
/// settings outside the calibrated span move by the nearest anchor's shift.
pub fn calibrate_lna_table(
    targets: &[(f64, f64)],
    scenario: &Scenario,
    start: &LnaBiasTable,
) -> Result<CalibrationReport, RfError> {
    calibrate_lna_table_with(targets, scenario, start, DEFAULT_CALIBRATION_TRIALS)
}

pub fn calibrate_lna_table_with(
    targets: &[(f64, f64)],
    scenario: &Scenario,
    start: &LnaBiasTable,
    trials: usize,
) -> Result<CalibrationReport, RfError> {
    start.validate()?;
    if targets.is_empty() {
        return Ok(CalibrationReport {
            table: start.clone(),
            anchors: Vec::new(),
            trials_per_evaluation: trials,
        });
    }
    if !scenario.rx.front_end {
        return Err(RfError::CalibrationInfeasible(
            "the scenario has the front-end disabled".into(),
        ));
    }
    if trials == 0 {
        return Err(RfError::CalibrationInfeasible(
            "zero trials per evaluation".into(),
        ));
    }
    let link = Link::new(scenario, start.clone()).map_err(sim_err)?;
    let ceiling = scenario.channel.snr_db + MER_TOLERANCE_DB;

    let mut sorted: Vec<(usize, f64, f64)> = targets
        .iter()
        .map(|&(b, m)| Ok((start.index_of(b)?, b, m)))
        .collect::<Result<_, RfError>>()?;
    sorted.sort_by_key(|t| t.0);
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(RfError::CalibrationInfeasible(
            "a setting is targeted twice".into(),
        ));
    }

    let mut anchors = Vec::new();
    for &(index, bias, target) in &sorted {
        if target > ceiling {
            return Err(RfError::CalibrationInfeasible(format!(
                "target {target} dB at {bias} uA exceeds the {} dB channel SNR",
                scenario.channel.snr_db
            )));
        }
        let best = mer_at(&link, start, index, NF_MIN_DB, trials)?;
        if best < target - MER_TOLERANCE_DB {
            return Err(RfError::CalibrationInfeasible(format!(
                "{bias} uA reaches only {best:.2} dB MER with a noiseless LNA (target {target} dB)"
            )));
        }
        let worst = mer_at(&link, start, index, NF_MAX_DB, trials)?;
        if worst > target + MER_TOLERANCE_DB {
            return Err(RfError::CalibrationInfeasible(format!(
                "{bias} uA still gives {worst:.2} dB MER at {NF_MAX_DB} dB NF (target {target} dB)"
            )));
        }
        let (mut lo, mut hi) = (NF_MIN_DB, NF_MAX_DB);
        let (mut nf, mut mer) = if (best - target).abs() <= (worst - target).abs() {
            (NF_MIN_DB, best)
        } else {
            (NF_MAX_DB, worst)
        };
        let mut evaluations = 2;
        for _ in 0..BISECTION_STEPS {
            if (mer - target).abs() < STOP_DB {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let m = mer_at(&link, start, index, mid, trials)?;
            evaluations += 1;
            if (m - target).abs() < (mer - target).abs() {
                nf = mid;
                mer = m;
            }
            if m > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (mer - target).abs() > MER_TOLERANCE_DB {
            return Err(RfError::CalibrationInfeasible(format!(
                "{bias} uA: bisection ended at {mer:.2} dB for a {target} dB target"
            )));
        }
        anchors.push((
            index,
            AnchorResult {
                bias_ua: bias,
                target_mer_db: target,
                achieved_mer_db: mer,
                nf_db: nf,
                evaluations,
            },
        ));
    }

    let mut table = start.clone();
    let x = |b: f64| b.log2();
    for (i, e) in table.entries.iter_mut().enumerate() {
        let old = start.entries[i].params.nf_db;
        let shift = |a: &(usize, AnchorResult)| a.1.nf_db - start.entries[a.0].params.nf_db;
        let first = anchors.first().expect("targets are non-empty");
        let last = anchors.last().expect("targets are non-empty");
        e.params.nf_db = if i <= first.0 {
            old + shift(first)
        } else if i >= last.0 {
            old + shift(last)
        } else {
            let k = anchors
                .iter()
                .position(|a| a.0 >= i)
                .expect("inside the anchor span");
            let (a, b) = (&anchors[k - 1], &anchors[k]);
            let u = (x(e.bias_ua) - x(a.1.bias_ua)) / (x(b.1.bias_ua) - x(a.1.bias_ua));
            a.1.nf_db + u * (b.1.nf_db - a.1.nf_db)
        }
        .max(0.0);
    }
    for (i, a) in &anchors {
        table.entries[*i].params.nf_db = a.nf_db;
    }
    table.validate().map_err(|e| {
        RfError::CalibrationInfeasible(format!("calibrated ladder is not monotone: {e}"))
    })?;
    Ok(CalibrationReport {
        table,
        anchors: anchors.into_iter().map(|(_, a)| a).collect(),
        trials_per_evaluation: trials,
    })
}
