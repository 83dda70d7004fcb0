use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use swipt_cli::config::{Experiment, RunConfig};
use swipt_cli::runner::{self, AppError};

/// Joint information and power transfer transceiver designer.
///
/// Exit codes: 0 success, 1 configuration error (the message names the
/// offending key), 2 solver error (the message names the error class).
#[derive(Parser)]
#[command(name = "swipt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment selected by the config file's `experiment` key
    Run(CommonArgs),
    /// Solve one energy-constrained transceiver design
    Solve(CommonArgs),
    /// Sweep the MSE-energy tradeoff region
    RegionMse(CommonArgs),
    /// Sweep the rate-energy tradeoff region
    RegionRate(CommonArgs),
    /// Record the per-start convergence history of one solve
    Converge(CommonArgs),
    /// Compare uncoded 4QAM bit error rates of the transmit designs
    Ber(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` config file; --set flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set starts=8 (repeatable, in order)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory for the manifest and CSV files
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel sections (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Full-scale BER run over 100000 channel draws
    #[arg(long)]
    full_scale: bool,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let (args, forced) = match &cli.command {
        Command::Run(a) => (a, None),
        Command::Solve(a) => (a, Some(Experiment::Solve)),
        Command::RegionMse(a) => (a, Some(Experiment::RegionMse)),
        Command::RegionRate(a) => (a, Some(Experiment::RegionRate)),
        Command::Converge(a) => (a, Some(Experiment::Converge)),
        Command::Ber(a) => (a, Some(Experiment::Ber)),
    };
    match execute(args, forced) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(AppError::Config(e)) => {
            eprintln!("config error: {e}");
            1
        }
        Err(AppError::Io(m)) => {
            eprintln!("io error: {m}");
            1
        }
        Err(AppError::Solver(m)) => {
            eprintln!("solver error: {m}");
            2
        }
    }
}

fn execute(args: &CommonArgs, forced: Option<Experiment>) -> Result<Vec<PathBuf>, AppError> {
    if let Some(n) = args.workers {
        // Ignore the error: the global pool can only be sized once, and a
        // second invocation in-process just keeps the first size.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    for assignment in &args.set {
        cfg.apply_set(assignment)?;
    }
    if let Some(experiment) = forced {
        cfg.experiment = experiment;
    }
    if args.full_scale {
        cfg.ber_channels = 100_000;
    }
    cfg.validate()?;
    runner::execute(&cfg, &args.out)
}
