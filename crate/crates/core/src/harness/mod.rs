//! Experiment runs, CSV logs, summary statistics and paired comparisons.

mod config;
mod csvlog;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{parse_override, ExperimentConfig};
pub use csvlog::{log_header, read_d_true, write_log, write_log_to};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::sim::{run_trial, Mode, Rig, Scenario, TrialLog};

/// Statistics of one trial's ground-truth distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub seed: u64,
    pub ticks: usize,
    pub mean: f64,
    /// Population standard deviation over ticks.
    pub std: f64,
    pub min: f64,
}

impl TrialStats {
    pub fn from_samples(seed: u64, d: &[f64]) -> Self {
        let n = d.len();
        if n == 0 {
            return Self {
                seed,
                ticks: 0,
                mean: f64::NAN,
                std: f64::NAN,
                min: f64::NAN,
            };
        }
        let mut sum = 0.0;
        for &x in d {
            sum += x;
        }
        let mean = sum / n as f64;
        let mut sq = 0.0;
        for &x in d {
            sq += (x - mean) * (x - mean);
        }
        Self {
            seed,
            ticks: n,
            mean,
            std: (sq / n as f64).sqrt(),
            min: d.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Mean distance over every tick of every trial and the largest per-trial
/// standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub scenario: String,
    pub mode: Mode,
    pub trials: Vec<TrialStats>,
    pub d_mean: f64,
    pub sigma_max: f64,
}

impl SummaryStats {
    pub fn from_series(scenario: &str, mode: Mode, series: &[(u64, Vec<f64>)]) -> Self {
        let trials: Vec<TrialStats> = series.iter().map(|(s, d)| TrialStats::from_samples(*s, d)).collect();
        let mut sum = 0.0;
        let mut n = 0usize;
        for (_, d) in series {
            for &x in d {
                sum += x;
            }
            n += d.len();
        }
        let sigma_max = trials.iter().map(|t| t.std).fold(0.0, f64::max);
        Self {
            scenario: scenario.to_string(),
            mode,
            trials,
            d_mean: if n == 0 { f64::NAN } else { sum / n as f64 },
            sigma_max,
        }
    }

    pub fn from_logs(logs: &[TrialLog]) -> Self {
        let series: Vec<(u64, Vec<f64>)> = logs.iter().map(|l| (l.seed, l.d_true().collect())).collect();
        let (name, mode) = logs
            .first()
            .map_or((String::new(), Mode::WB), |l| (l.scenario.clone(), l.mode));
        Self::from_series(&name, mode, &series)
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub logs: Vec<TrialLog>,
    pub summary: SummaryStats,
}

/// Runs `trials` trials seeded `base_seed + i`.
pub fn run_trials(
    rig: &Rig,
    scenario: &Scenario,
    mode: Mode,
    trials: usize,
    base_seed: u64,
    exec: Execution,
) -> Result<RunReport> {
    let logs = par::map_range(exec, trials, |i| {
        run_trial(rig, scenario, mode, base_seed.wrapping_add(i as u64), exec)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let summary = SummaryStats::from_logs(&logs);
    Ok(RunReport { logs, summary })
}

pub fn trial_file_name(mode: Mode, i: usize) -> String {
    format!("{mode}_trial_{i:02}.csv")
}

/// Loads, runs and writes per-trial CSVs, `summary.csv` and `trials.csv`.
pub fn run(cfg: &ExperimentConfig, exec: Execution) -> Result<RunReport> {
    let (rig, scenario) = cfg.prepare()?;
    let report = run_trials(&rig, &scenario, cfg.mode, cfg.trials, cfg.base_seed(&scenario), exec)?;
    write_report(&report, &cfg.out)?;
    Ok(report)
}

pub fn write_report(report: &RunReport, out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (i, log) in report.logs.iter().enumerate() {
        write_log(log, &out.join(trial_file_name(log.mode, i)))?;
    }
    write_summary(&report.summary, &out.join(format!("{}_summary.csv", report.summary.mode)))?;
    write_trials(&report.summary, &out.join(format!("{}_trials.csv", report.summary.mode)))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

pub fn write_summary(s: &SummaryStats, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["scenario", "mode", "trials", "d_mean", "sigma_max"])?;
    w.write_record([
        s.scenario.clone(),
        s.mode.to_string(),
        s.trials.len().to_string(),
        s.d_mean.to_string(),
        s.sigma_max.to_string(),
    ])?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trials(s: &SummaryStats, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["trial", "seed", "ticks", "mean", "std", "min"])?;
    for (i, t) in s.trials.iter().enumerate() {
        w.write_record([
            i.to_string(),
            t.seed.to_string(),
            t.ticks.to_string(),
            t.mean.to_string(),
            t.std.to_string(),
            t.min.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Paired difference of two runs of the same scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub mode_a: Mode,
    pub mode_b: Mode,
    /// `(trial, t, d_a, d_b)` for every tick of every paired trial.
    pub rows: Vec<(usize, f64, f64, f64)>,
    pub mean_delta: f64,
    pub max_delta: f64,
}

/// Pairs trials of two logs sets tick by tick; `delta = d_a − d_b`.
pub fn compare_logs(a: &[TrialLog], b: &[TrialLog]) -> Result<CompareReport> {
    let (Some(fa), Some(fb)) = (a.first(), b.first()) else {
        return Err(Error::ScenarioMismatch("nothing to compare".into()));
    };
    if fa.scenario != fb.scenario {
        return Err(Error::ScenarioMismatch(format!("'{}' vs '{}'", fa.scenario, fb.scenario)));
    }
    let mut rows = Vec::new();
    let mut sum = 0.0;
    let mut max_delta = f64::NEG_INFINITY;
    for (i, (la, lb)) in a.iter().zip(b).enumerate() {
        if la.rows.len() != lb.rows.len() {
            return Err(Error::ScenarioMismatch(format!(
                "trial {i}: {} ticks vs {}",
                la.rows.len(),
                lb.rows.len()
            )));
        }
        for (ra, rb) in la.rows.iter().zip(&lb.rows) {
            if ra.t != rb.t {
                return Err(Error::ScenarioMismatch(format!("trial {i}: time {} vs {}", ra.t, rb.t)));
            }
            let d = ra.d_true - rb.d_true;
            sum += d;
            max_delta = max_delta.max(d);
            rows.push((i, ra.t, ra.d_true, rb.d_true));
        }
    }
    let n = rows.len();
    Ok(CompareReport {
        mode_a: fa.mode,
        mode_b: fb.mode,
        rows,
        mean_delta: if n == 0 { f64::NAN } else { sum / n as f64 },
        max_delta: if n == 0 { f64::NAN } else { max_delta },
    })
}

/// Runs both experiments on the same scenario and writes `compare.csv` and
/// `compare_summary.csv` into `out`.
pub fn compare(a: &ExperimentConfig, b: &ExperimentConfig, out: &Path, exec: Execution) -> Result<CompareReport> {
    let same = |x: &PathBuf, y: &PathBuf| match (x.canonicalize(), y.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => x == y,
    };
    if !same(&a.scenario, &b.scenario) {
        return Err(Error::ScenarioMismatch(format!(
            "{} vs {}",
            a.scenario.display(),
            b.scenario.display()
        )));
    }
    let (rig_a, sc_a) = a.prepare()?;
    let (rig_b, sc_b) = b.prepare()?;
    let trials = a.trials.min(b.trials);
    let ra = run_trials(&rig_a, &sc_a, a.mode, trials, a.base_seed(&sc_a), exec)?;
    let rb = run_trials(&rig_b, &sc_b, b.mode, trials, b.base_seed(&sc_b), exec)?;
    let report = compare_logs(&ra.logs, &rb.logs)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("compare.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["trial", "t", "d_true_a", "d_true_b", "delta"])?;
    for &(i, t, da, db) in &report.rows {
        w.write_record([i.to_string(), t.to_string(), da.to_string(), db.to_string(), (da - db).to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let path = out.join("compare_summary.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["mode_a", "mode_b", "ticks", "mean_delta", "max_delta"])?;
    w.write_record([
        report.mode_a.to_string(),
        report.mode_b.to_string(),
        report.rows.len().to_string(),
        report.mean_delta.to_string(),
        report.max_delta.to_string(),
    ])?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(report)
}
