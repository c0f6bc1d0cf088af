//! Batches of trials, aggregation and trace verification.
//!
//! The per-round failure rate is `1 - (1 - f)^(1/T)` for a per-trial failure
//! fraction `f` over the trials that completed. Wilson 95% bounds on `f` are
//! mapped through the same conversion.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{read_trace, run_trial, write_trace, Config, EngineDiagnostics, EventKind, Trace, TrialOutcome};
use crate::error::{ConfigError, SimError};
use crate::ledger::{self, InequalityViolations, Verdict};

const Z95: f64 = 1.959_963_984_540_054;

/// Grid of `(L, p)` points sharing the other parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(rename = "L")]
    pub ls: Vec<u32>,
    #[serde(rename = "p")]
    pub ps: Vec<f64>,
    #[serde(rename = "T")]
    pub rounds: u32,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

impl SweepSpec {
    /// Configurations in row order: `L` outer, `p` inner.
    pub fn configs(&self) -> Result<Vec<Config>, ConfigError> {
        if self.ls.is_empty() || self.ps.is_empty() {
            return Err(ConfigError::EmptySweep);
        }
        let mut out = Vec::new();
        for &l in &self.ls {
            for &p in &self.ps {
                let cfg = Config {
                    trials: self.trials,
                    seed: self.seed,
                    ..Config::new(l, p, self.rounds)
                };
                cfg.validate()?;
                out.push(cfg);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    #[serde(rename = "L")]
    pub l: u32,
    pub p: f64,
    #[serde(rename = "T")]
    pub rounds: u32,
    pub trials: u64,
    pub sigma_failures: u64,
    pub psi_failures: u64,
    pub failures_total: u64,
    pub failure_rate_per_round: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub completion_timeouts: u64,
    pub master_seed: u64,
}

/// Everything aggregated over one batch; `row` is what goes to the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub row: ResultRow,
    pub engine: EngineDiagnostics,
    pub violations: InequalityViolations,
    pub structure_errors: u64,
    pub flag_mismatches: u64,
    pub transfer_fallbacks: u64,
    pub fermion_events: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
    /// Directory receiving `trial_NNNNNN.jsonl` files when set.
    pub trace_dir: Option<PathBuf>,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let phat = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn per_round_rate(trial_fraction: f64, rounds: u32) -> f64 {
    1.0 - (1.0 - trial_fraction).powf(1.0 / rounds as f64)
}

pub fn trace_file_name(index: u64) -> String {
    format!("trial_{index:06}.jsonl")
}

#[derive(Debug, Clone, Default)]
struct Summary {
    verdict: Option<Verdict>,
    engine: EngineDiagnostics,
}

fn summarize(outcome: &TrialOutcome) -> Summary {
    Summary {
        verdict: outcome.verdict.clone(),
        engine: outcome.diagnostics.clone(),
    }
}

fn run_one(config: &Config, index: u64, trace_dir: Option<&Path>) -> Result<Summary, SimError> {
    let outcome = run_trial(config, index)?;
    if let Some(dir) = trace_dir {
        let file = fs::File::create(dir.join(trace_file_name(index)))?;
        let mut w = std::io::BufWriter::new(file);
        write_trace(&mut w, &outcome.trace, outcome.verdict.as_ref())?;
        w.flush()?;
    }
    Ok(summarize(&outcome))
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Invariant(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs `config.trials` trials and aggregates them.
pub fn run(config: &Config, opts: &RunOptions) -> Result<RunReport, SimError> {
    config.validate()?;
    if let Some(dir) = &opts.trace_dir {
        fs::create_dir_all(dir)?;
    }
    let dir = opts.trace_dir.as_deref();
    let summaries: Vec<Result<Summary, SimError>> = with_pool(opts.workers, || {
        (0..config.trials)
            .into_par_iter()
            .map(|i| run_one(config, i, dir))
            .collect()
    })?;
    let mut report = RunReport {
        row: ResultRow {
            l: config.l,
            p: config.p,
            rounds: config.rounds,
            trials: config.trials,
            sigma_failures: 0,
            psi_failures: 0,
            failures_total: 0,
            failure_rate_per_round: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            completion_timeouts: 0,
            master_seed: config.seed,
        },
        engine: EngineDiagnostics::default(),
        violations: InequalityViolations::default(),
        structure_errors: 0,
        flag_mismatches: 0,
        transfer_fallbacks: 0,
        fermion_events: 0,
    };
    for s in summaries {
        let s = s?;
        report.engine.add(&s.engine);
        let Some(v) = s.verdict else {
            report.row.completion_timeouts += 1;
            continue;
        };
        report.row.sigma_failures += v.sigma_failure as u64;
        report.row.psi_failures += v.psi_failure as u64;
        report.row.failures_total += !v.success as u64;
        let d = &v.diagnostics;
        report.violations.add(&d.violations);
        report.structure_errors += d.structure_errors;
        report.flag_mismatches += d.flag_mismatches;
        report.transfer_fallbacks += d.transfer_fallbacks;
        report.fermion_events += d.fermion_events;
    }
    let row = &mut report.row;
    let completed = row.trials - row.completion_timeouts;
    let (lo, hi) = wilson_interval(row.failures_total, completed);
    let f = if completed == 0 {
        0.0
    } else {
        row.failures_total as f64 / completed as f64
    };
    row.failure_rate_per_round = per_round_rate(f, row.rounds);
    row.ci_low = per_round_rate(lo, row.rounds);
    row.ci_high = per_round_rate(hi, row.rounds);
    Ok(report)
}

/// Sub-directory for the traces of one sweep point.
pub fn point_dir(config: &Config) -> String {
    format!("L{}_p{}", config.l, config.p)
}

pub fn sweep(spec: &SweepSpec, opts: &RunOptions) -> Result<Vec<RunReport>, SimError> {
    let mut out = Vec::new();
    for cfg in spec.configs()? {
        let point = RunOptions {
            workers: opts.workers,
            trace_dir: opts.trace_dir.as_ref().map(|d| d.join(point_dir(&cfg))),
        };
        out.push(run(&cfg, &point)?);
    }
    Ok(out)
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

/// Result of re-analysing a stored trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub recomputed: Verdict,
    pub recorded: Option<Verdict>,
    pub verdict_matches: bool,
    pub correction_matches: bool,
    pub violations: InequalityViolations,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.verdict_matches
            && self.correction_matches
            && self.violations.optimality == 0
            && self.recomputed.diagnostics.structure_errors == 0
    }
}

/// Re-runs the ledger on a trace and compares with what was recorded.
pub fn verify_trace(trace: &Trace, recorded: Option<&Verdict>) -> Result<VerificationReport, SimError> {
    let mut bare = trace.clone();
    bare.events.retain(|e| e.kind != EventKind::FermionCorrection);
    let stored: Vec<_> = trace
        .events
        .iter()
        .filter(|e| e.kind == EventKind::FermionCorrection)
        .cloned()
        .collect();
    let analysis = ledger::analyze(&bare)?;
    let correction_matches = stored == analysis.correction_events();
    Ok(VerificationReport {
        verdict_matches: recorded == Some(&analysis.verdict),
        violations: analysis.verdict.diagnostics.violations,
        recorded: recorded.cloned(),
        recomputed: analysis.verdict,
        correction_matches,
    })
}

pub fn replay_verify(path: &Path) -> Result<VerificationReport, SimError> {
    let file = read_trace(BufReader::new(fs::File::open(path)?))?;
    verify_trace(&file.trace, file.verdict.as_ref())
}
