//! Command-line driver for the Monte-Carlo experiment harness.
//!
//! Each subcommand runs one experiment from a scenario config (or the
//! built-in desk-scale default), writes its CSV files into the output
//! directory, and prints the paths it wrote.  A run is exactly reproducible
//! from the (config, seed) pair: the same invocation yields byte-identical
//! CSV output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uwb_icl::harness::results::{write_results, write_trajectory};
use uwb_icl::harness::{Runner, ScenarioConfig};
use uwb_icl::Result;

#[derive(Parser)]
#[command(
    name = "uwb-icl",
    version,
    about = "IR-UWB downlink experiments: detection, acquisition, drift, BER, localization, tracking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario config file (TOML).  Omit to use the built-in default
    /// scenario; unknown keys in the file are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed; overrides `run.seed` from the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Trials per grid point; overrides `run.trials` (for `track`, the
    /// number of trajectory repetitions per case).
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,

    /// Directory the CSV files are written into (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    out: PathBuf,

    /// Full-size run: 1e5 trials for roc/sfd-split/ber, 10x the configured
    /// trials otherwise.  An explicit --trials wins over --full.
    #[arg(long, global = true)]
    full: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Pulse-detection ROC: analytic and Monte-Carlo hit/false-alarm rates.
    Roc,
    /// Frame-start acquisition probability vs. first-symbol energy fraction.
    SfdSplit,
    /// Clock-drift RMSE vs. confidence threshold, plain vs. weighted LS.
    Drift,
    /// Payload bit-error rate vs. confidence threshold.
    Ber,
    /// 3-D TDOA self-localization RMSE vs. Eb/N0 and confidence threshold.
    Rmse,
    /// Moving-agent tracking with confidence-based anchor selection.
    Track,
    /// Every experiment above, plus the repetition-vs-power comparison.
    All,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut scenario = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };

    if cli.full {
        scenario.run.trials = match cli.command {
            Command::Roc | Command::SfdSplit | Command::Ber => 100_000,
            _ => scenario.run.trials.saturating_mul(10),
        };
        scenario.tracking.trials = scenario.tracking.trials.saturating_mul(10);
    }
    if let Some(t) = cli.trials {
        scenario.run.trials = t;
        if cli.command == Command::Track {
            scenario.tracking.trials = t;
        }
    }
    if let Some(seed) = cli.seed {
        scenario.run.seed = seed;
    }
    scenario.validate()?;

    std::fs::create_dir_all(&cli.out)?;
    let runner = Runner::new(scenario)?;

    let mut written = Vec::new();
    let save = |name: &str, rows: &[uwb_icl::harness::ResultRow]| -> Result<PathBuf> {
        let path = cli.out.join(name);
        write_results(&path, rows)?;
        Ok(path)
    };
    match cli.command {
        Command::Roc => written.push(save("roc.csv", &runner.run_roc()?)?),
        Command::SfdSplit => written.push(save("sfd_split.csv", &runner.run_sfd_split()?)?),
        Command::Drift => written.push(save("drift.csv", &runner.run_drift()?)?),
        Command::Ber => written.push(save("ber.csv", &runner.run_ber()?)?),
        Command::Rmse => written.push(save("rmse.csv", &runner.run_rmse()?)?),
        Command::Track => {
            let (rows, tracks) = runner.run_tracking()?;
            written.push(save("tracking.csv", &rows)?);
            for (name, points) in tracks {
                let path = cli.out.join(format!("{name}.csv"));
                write_trajectory(&path, &points)?;
                written.push(path);
            }
        }
        Command::All => written = runner.run_all(&cli.out)?,
    }
    Ok(written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in &paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
