//! Command-line front end: `optimize`, `table`, `schedule`, `simulate`, `bench`.
//!
//! Exit codes: 0 success, 1 no feasible base period, 2 invalid input,
//! 3 internal failure (optimizer disagreement under `--check`, I/O on output).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::bench::{self, BenchError, GeneratorConfig, GeneratorKind};
use crate::objective;
use crate::optimizer::{self, CheckedRun, Method, OptimizeError};
use crate::rational::{self, Rational};
use crate::schedule::{self, CyclicSchedule, ScheduleError};
use crate::task::{DocumentError, TaskSet, TaskSetDocument, Time};
use crate::verify::{self, SimulateError};

/// Environment variable that overrides the bench seed.
pub const SEED_ENV: &str = "CYCLOSCHED_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "cyclosched",
    version,
    about = "Base-period optimization for cyclic executives"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the optimal base period L.
    Optimize(OptimizeArgs),
    /// Print F(L) and its components for every L from T1 down to 1.
    Table(TableArgs),
    /// Build the cyclic timetable for a base period.
    Schedule(ScheduleArgs),
    /// Replay a timetable over its hyperperiod and verify it.
    Simulate(SimulateArgs),
    /// Compare branch-and-bound against exhaustive search on generated instances.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Io {
    /// Input JSON file.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output file (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub io: Io,
    /// Use the exhaustive oracle instead of branch-and-bound.
    #[arg(long, conflicts_with = "check")]
    pub oracle: bool,
    /// Run both optimizers and fail unless they agree exactly.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub io: Io,
    /// Decimal places in the text table.
    #[arg(long, default_value_t = 4)]
    pub precision: usize,
    /// Emit the breakdowns as JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub io: Io,
    /// Base period; the branch-and-bound optimum when omitted.
    #[arg(short = 'L', long)]
    pub base_period: Option<Time>,
    /// Print a text Gantt chart instead of JSON.
    #[arg(long)]
    pub gantt: bool,
    /// Maximum cycles drawn in the Gantt chart.
    #[arg(long, default_value_t = 64)]
    pub gantt_cycles: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Schedule JSON (from `schedule`) or a task-set JSON.
    #[command(flatten)]
    pub io: Io,
    /// Base period when the input is a task set (optimum when omitted).
    #[arg(short = 'L', long)]
    pub base_period: Option<Time>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Random,
    Prime,
    Fibonacci,
}

impl From<KindArg> for GeneratorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Random => GeneratorKind::Random,
            KindArg::Prime => GeneratorKind::Prime,
            KindArg::Fibonacci => GeneratorKind::Fibonacci,
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "random")]
    pub kind: KindArg,
    /// Tasks per instance (M).
    #[arg(short = 'm', long, default_value_t = 4)]
    pub tasks: usize,
    #[arg(long, default_value_t = 5)]
    pub period_min: Time,
    #[arg(long, default_value_t = 50)]
    pub period_max: Time,
    /// 1-based index of the first prime / Fibonacci number.
    #[arg(long, default_value_t = 3)]
    pub start_index: usize,
    /// Base seed; overridden by CYCLOSCHED_SEED when set.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Switch overhead p, as a decimal.
    #[arg(long, default_value = "0.2")]
    pub overhead: String,
    /// Also write the per-run CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Report JSON file (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Infeasible(#[from] OptimizeError),
    #[error("optimizers disagree: {0}")]
    OracleMismatch(String),
    #[error("cannot write output: {0}")]
    Write(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 1,
            CliError::Read { .. } | CliError::Parse { .. } | CliError::InvalidInput(_) => 2,
            CliError::OracleMismatch(_) | CliError::Write(_) => 3,
        }
    }
}

impl From<DocumentError> for CliError {
    fn from(e: DocumentError) -> Self {
        CliError::InvalidInput(e.to_string())
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        CliError::InvalidInput(e.to_string())
    }
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        CliError::InvalidInput(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::OracleMismatch { .. } => CliError::OracleMismatch(e.to_string()),
            other => CliError::InvalidInput(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, e: serde_json::Error) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn parse_set(path: &Path, text: &str) -> Result<TaskSet, CliError> {
    let doc: TaskSetDocument = serde_json::from_str(text).map_err(|e| parse_error(path, e))?;
    let validated = doc.validate()?;
    for w in &validated.warnings {
        eprintln!("warning: {w}");
    }
    Ok(validated.set)
}

/// Reads, parses and validates a task-set JSON file.
pub fn load_task_set(path: &Path) -> Result<TaskSet, CliError> {
    parse_set(path, &read(path)?)
}

fn emit_text(output: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    let write_err = |e: io::Error| CliError::Write(e.to_string());
    match output {
        Some(path) => fs::write(path, text).map_err(write_err),
        None => stdout.write_all(text.as_bytes()).map_err(write_err),
    }
}

fn emit_json<T: Serialize>(
    output: Option<&Path>,
    value: &T,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Write(e.to_string()))?;
    text.push('\n');
    emit_text(output, &text, stdout)
}

fn pick_base(set: &TaskSet, base: Option<Time>) -> Result<Time, CliError> {
    match base {
        Some(l) => Ok(l),
        None => Ok(optimizer::bnb_optimize(set)?.best_base_period),
    }
}

fn optimize(args: &OptimizeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let set = load_task_set(&args.io.input)?;
    let result = if args.check {
        let run = CheckedRun::run(&set);
        if !run.agrees() {
            let describe = |r: &Result<optimizer::OptimizationResult, OptimizeError>| match r {
                Ok(r) => format!("L={} F={}", r.best_base_period, r.best.f),
                Err(e) => e.to_string(),
            };
            return Err(CliError::OracleMismatch(format!(
                "oracle {} vs bnb {}",
                describe(&run.oracle),
                describe(&run.bnb)
            )));
        }
        run.bnb?
    } else {
        optimizer::optimize(
            &set,
            if args.oracle {
                Method::Oracle
            } else {
                Method::Bnb
            },
        )?
    };
    emit_json(args.io.output.as_deref(), &result, stdout)
}

/// Text table: one column per L, rows L, F, F1, F2, U', feasible.
pub fn format_table(rows: &[objective::ObjectiveBreakdown], precision: usize) -> String {
    let mut lines: Vec<String> = Vec::new();
    let row = |label: &str, cells: Vec<String>| format!("{label}\t{}", cells.join("\t"));
    lines.push(row(
        "L",
        rows.iter().map(|r| r.base_period.to_string()).collect(),
    ));
    let dec = |v: &Rational| rational::to_decimal(v, precision);
    lines.push(row("F", rows.iter().map(|r| dec(&r.f)).collect()));
    lines.push(row("F1", rows.iter().map(|r| dec(&r.f1)).collect()));
    lines.push(row("F2", rows.iter().map(|r| dec(&r.f2)).collect()));
    lines.push(row(
        "U'",
        rows.iter().map(|r| dec(&r.quantized_utilization)).collect(),
    ));
    lines.push(row(
        "ok",
        rows.iter()
            .map(|r| if r.feasible { "yes" } else { "no" }.to_string())
            .collect(),
    ));
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

fn table(args: &TableArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let set = load_task_set(&args.io.input)?;
    let rows = objective::objective_table(&set);
    if args.json {
        emit_json(args.io.output.as_deref(), &rows, stdout)
    } else {
        emit_text(
            args.io.output.as_deref(),
            &format_table(&rows, args.precision),
            stdout,
        )
    }
}

fn schedule(args: &ScheduleArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let set = load_task_set(&args.io.input)?;
    let base = pick_base(&set, args.base_period)?;
    let sched = schedule::build_schedule(&set, base)?;
    if args.gantt {
        emit_text(
            args.io.output.as_deref(),
            &schedule::render_gantt(&sched, args.gantt_cycles),
            stdout,
        )
    } else {
        emit_json(args.io.output.as_deref(), &sched, stdout)
    }
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let path = &args.io.input;
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    let sched: CyclicSchedule = if value.get("cycle_order").is_some() {
        serde_json::from_str(&text).map_err(|e| parse_error(path, e))?
    } else {
        let set = parse_set(path, &text)?;
        let base = pick_base(&set, args.base_period)?;
        schedule::build_schedule(&set, base)?
    };
    let report = verify::verify_schedule(&sched)?;
    emit_json(args.io.output.as_deref(), &report, stdout)
}

fn bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let seed = match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::InvalidInput(format!("{SEED_ENV}={v} is not a u64")))?,
        Err(_) => args.seed,
    };
    let overhead = rational::parse_decimal(&args.overhead)
        .map_err(|e| CliError::InvalidInput(format!("--overhead: {e}")))?;
    let cfg = GeneratorConfig {
        kind: args.kind.into(),
        tasks: args.tasks,
        period_min: args.period_min,
        period_max: args.period_max,
        start_index: args.start_index,
        seed,
        runs: args.runs,
        overhead,
    };
    let report = bench::efficiency_experiment(&cfg)?;
    if let Some(path) = &args.csv {
        let file = fs::File::create(path).map_err(|e| CliError::Write(e.to_string()))?;
        bench::write_csv(&report, file).map_err(|e| CliError::Write(e.to_string()))?;
    }
    emit_json(args.output.as_deref(), &report, stdout)
}

/// Executes one parsed invocation, writing primary output to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Optimize(a) => optimize(a, stdout),
        Command::Table(a) => table(a, stdout),
        Command::Schedule(a) => schedule(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Bench(a) => bench(a, stdout),
    }
}
