use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isingqec::engine::Config;
use isingqec::error::SimError;
use isingqec::harness::{self, RunOptions, RunReport, SweepSpec};

#[derive(Parser)]
#[command(name = "isingqec", version, about = "Ising-anyon continuous error correction on a torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run trials at a single (L, p) point.
    Run(RunArgs),
    /// Run trials over a grid of L and p values.
    Sweep(SweepArgs),
    /// Re-analyse a stored trace and compare with its recorded verdict.
    ReplayVerify {
        trace: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long = "T")]
    rounds: Option<u32>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Results CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "traces")]
    trace_dir: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Write one JSONL trace per trial under --trace-dir.
    #[arg(long)]
    emit_traces: bool,
    /// JSON file with the configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            workers: self.workers,
            trace_dir: self.emit_traces.then(|| self.trace_dir.clone()),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long = "L")]
    l: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "L", value_delimiter = ',')]
    l: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[command(flatten)]
    common: Common,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, SimError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn missing(flag: &str) -> SimError {
    SimError::Trace(format!("{flag} is required without --config"))
}

fn run_config(args: &RunArgs) -> Result<Config, SimError> {
    let c = &args.common;
    let mut cfg = match &c.config {
        Some(path) => read_json(path)?,
        None => Config::new(
            args.l.ok_or_else(|| missing("--L"))?,
            args.p.ok_or_else(|| missing("--p"))?,
            c.rounds.ok_or_else(|| missing("--T"))?,
        ),
    };
    cfg.l = args.l.unwrap_or(cfg.l);
    cfg.p = args.p.unwrap_or(cfg.p);
    cfg.rounds = c.rounds.unwrap_or(cfg.rounds);
    cfg.trials = c.trials.unwrap_or(cfg.trials);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    Ok(cfg)
}

fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec, SimError> {
    let c = &args.common;
    let mut spec = match &c.config {
        Some(path) => read_json(path)?,
        None => SweepSpec {
            ls: args.l.clone(),
            ps: args.p.clone(),
            rounds: c.rounds.ok_or_else(|| missing("--T"))?,
            trials: 1,
            seed: 0,
        },
    };
    if !args.l.is_empty() {
        spec.ls = args.l.clone();
    }
    if !args.p.is_empty() {
        spec.ps = args.p.clone();
    }
    spec.rounds = c.rounds.unwrap_or(spec.rounds);
    spec.trials = c.trials.unwrap_or(spec.trials);
    spec.seed = c.seed.unwrap_or(spec.seed);
    Ok(spec)
}

fn report_diagnostics(reports: &[RunReport]) {
    for r in reports {
        let v = &r.violations;
        eprintln!(
            "L={} p={}: engine diagnostics {}, optimality violations {}, W_h>=W_v-f violations {}, structure errors {}",
            r.row.l,
            r.row.p,
            r.engine.total(),
            v.optimality,
            v.wh_ge_wv_minus_f,
            r.structure_errors
        );
    }
}

fn emit_csv(out: Option<&Path>, reports: &[RunReport]) -> Result<(), SimError> {
    let rows: Vec<_> = reports.iter().map(|r| r.row.clone()).collect();
    match out {
        Some(path) => harness::write_csv(fs::File::create(path)?, &rows),
        None => harness::write_csv(io::stdout().lock(), &rows),
    }
}

fn main_inner(cli: Cli) -> Result<bool, SimError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = run_config(&args)?;
            let report = harness::run(&cfg, &args.common.options())?;
            let reports = [report];
            report_diagnostics(&reports);
            emit_csv(args.common.out.as_deref(), &reports)?;
        }
        Command::Sweep(args) => {
            let spec = sweep_spec(&args)?;
            let reports = harness::sweep(&spec, &args.common.options())?;
            report_diagnostics(&reports);
            emit_csv(args.common.out.as_deref(), &reports)?;
        }
        Command::ReplayVerify { trace } => {
            let report = harness::replay_verify(&trace)?;
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &report)?;
            writeln!(stdout)?;
            return Ok(report.ok());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
