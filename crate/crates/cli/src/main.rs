mod commands;
mod engine_spec;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use skf_core::ingest::OutcomeMode;
use skf_core::Execution;

use engine_spec::EngineSpec;

/// Online Bayesian rating: synthetic experiments and league evaluation.
#[derive(Debug, Parser)]
#[command(name = "skf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run engines on replicated synthetic seasons; one per-day CSV per engine.
    Simulate(SimulateArgs),
    /// Rate one season file and write per-game rating snapshots.
    Rate(RateArgs),
    /// Log-score windows and entropy over one or more season files.
    Evaluate(EvaluateArgs),
    /// Frequency estimates of the home advantage and draw parameters.
    EstimateParams(EstimateArgs),
    /// Grid search over v0 / eps / K / vbar.
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Args)]
struct RunOpts {
    /// key=value file whose entries act as flags; command-line flags win.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: RAYON_NUM_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Run replicates / grid cells one after another.
    #[arg(long)]
    sequential: bool,
}

impl RunOpts {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Kl,
    Logscore,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct SimulateArgs {
    /// Number of players (even).
    #[arg(long = "M", default_value_t = 20)]
    players: usize,
    /// Number of days.
    #[arg(long = "D", default_value_t = 100)]
    days: usize,
    #[arg(long, default_value_t = 5000)]
    replicates: usize,
    /// Outcome noise of the generator.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.998)]
    beta_hat: f64,
    /// Walk variance (default 1 - beta_hat^2).
    #[arg(long)]
    eps_hat: Option<f64>,
    /// 0-based day on which players are replaced.
    #[arg(long)]
    switch_day: Option<usize>,
    /// How many players are replaced (default 5 with --switch-day).
    #[arg(long, requires = "switch_day")]
    switch_count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = MetricArg::Kl)]
    metric: MetricArg,
    /// Engine specs, e.g. `vskf:eps=0.004,v0=1`.
    #[arg(long, num_args = 1.., required = true)]
    engines: Vec<EngineSpec>,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    run: RunOpts,
}

fn parse_mode(s: &str) -> Result<OutcomeMode, String> {
    OutcomeMode::from_name(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct RateArgs {
    #[arg(long)]
    data: PathBuf,
    /// binary_final | ternary_regulation | ternary_final
    #[arg(long, value_parser = parse_mode, default_value = "binary_final")]
    mode: OutcomeMode,
    #[arg(long, num_args = 1.., required = true)]
    engines: Vec<EngineSpec>,
    /// Also write the final covariance (dense matrix for kf, variances otherwise).
    #[arg(long)]
    export_covariance: bool,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct EvaluateArgs {
    #[arg(long, num_args = 1.., required = true)]
    data: Vec<PathBuf>,
    #[arg(long, value_parser = parse_mode, default_value = "binary_final")]
    mode: OutcomeMode,
    #[arg(long, default_value = "league")]
    league: String,
    #[arg(long, num_args = 1..)]
    engines: Vec<EngineSpec>,
    /// Add the constant frequency predictor as a row.
    #[arg(long)]
    baseline: bool,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct EstimateArgs {
    #[arg(long, num_args = 1.., required = true)]
    data: Vec<PathBuf>,
    #[arg(long, value_parser = parse_mode, default_value = "binary_final")]
    mode: OutcomeMode,
    /// Also write params.csv and a manifest here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct ScanArgs {
    #[arg(long, num_args = 1.., required = true)]
    data: Vec<PathBuf>,
    #[arg(long, value_parser = parse_mode, default_value = "binary_final")]
    mode: OutcomeMode,
    /// Base engine; grid values replace its fields.
    #[arg(long)]
    engine: EngineSpec,
    #[arg(long, num_args = 1..)]
    v0: Vec<f64>,
    #[arg(long, num_args = 1..)]
    eps: Vec<f64>,
    #[arg(long, num_args = 1..)]
    k: Vec<f64>,
    #[arg(long, num_args = 1..)]
    vbar: Vec<f64>,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    run: RunOpts,
}

/// Boolean flags, by subcommand, that a config file may switch on.
fn switches(command: &str) -> &'static [&'static str] {
    match command {
        "rate" => &["sequential", "export-covariance"],
        "evaluate" => &["sequential", "baseline"],
        _ => &["sequential"],
    }
}

/// Splices the entries of `--config FILE` in front of the subcommand's own
/// flags, so that explicit flags override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(cmd_pos) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 1) else {
        return Ok(args);
    };
    let command = args[cmd_pos].to_string_lossy().into_owned();
    let mut path = None;
    for (i, a) in args.iter().enumerate().skip(cmd_pos + 1) {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let tokens = manifest::config_tokens(&path, &command, switches(&command)).map_err(UsageError)?;
    let mut out = args[..=cmd_pos].to_vec();
    out.extend(tokens.into_iter().map(OsString::from));
    out.extend(args[cmd_pos + 1..].iter().cloned());
    Ok(out)
}

/// Marks an error as a usage problem (exit code 2).
#[derive(Debug)]
struct UsageError(anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for UsageError {}

/// Marks an error as caused by input data (exit code 1).
#[derive(Debug)]
pub struct DataError(pub anyhow::Error);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for DataError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if cause.is::<DataError>() || cause.is::<std::io::Error>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<skf_core::Error>() {
            return if e.is_data_error() { 1 } else { 2 };
        }
    }
    2
}

fn configure_threads(run: &RunOpts) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(n) = run.threads {
        use anyhow::Context;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = run;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            configure_threads(&a.run)?;
            commands::simulate(a)
        }
        Command::Rate(a) => {
            configure_threads(&a.run)?;
            commands::rate(a)
        }
        Command::Evaluate(a) => {
            configure_threads(&a.run)?;
            commands::evaluate(a)
        }
        Command::EstimateParams(a) => {
            configure_threads(&a.run)?;
            commands::estimate_params(a)
        }
        Command::Scan(a) => {
            configure_threads(&a.run)?;
            commands::scan(a)
        }
    }
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
