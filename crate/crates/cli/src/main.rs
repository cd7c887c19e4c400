// SPDX-License-Identifier: Apache-2.0

//! `mlrss`: fit baselines and outbreak profiles, simulate labeled streams,
//! run the scan detector or EWMA comparator, and evaluate alarm streams.
//!
//! Exit status: 0 on success, 2 on usage errors, 3 on data errors and 4 on
//! numerical failures. Every failure prints one diagnostic line to stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Preset;

#[derive(Debug, Parser)]
#[command(name = "mlrss", version, about = "Outbreak detection with the mixture likelihood ratio scan statistic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Source preset: ED, OTC, TH or custom.
    #[arg(long, global = true, value_parser = parse_preset)]
    preset: Option<Preset>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the Poisson log-linear baseline to an outbreak-free count file.
    FitBaseline {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Baseline model file (stdout if omitted).
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit one outbreak profile per labeled outbreak and write the bank.
    FitProfiles {
        /// Count file containing the training outbreaks.
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Outbreak table for the count file.
        #[arg(long, value_name = "FILE")]
        outbreaks: PathBuf,
        #[arg(long, value_name = "FILE")]
        baseline: PathBuf,
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a labeled count stream from a preset scenario.
    Simulate {
        #[arg(long)]
        seed: Option<u64>,
        /// Number of injected outbreaks (0 for an outbreak-free stream).
        #[arg(long)]
        outbreak_count: Option<usize>,
        /// Output directory for counts.csv, truth.csv and outbreaks.csv.
        #[arg(long, value_name = "DIR")]
        output: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Score a count file day by day.
    Detect {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        baseline: PathBuf,
        /// Profile bank (required for the scan detector).
        #[arg(long, value_name = "FILE")]
        bank: Option<PathBuf>,
        /// Score file (stdout if omitted).
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a score file against an outbreak table.
    Evaluate {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        outbreaks: PathBuf,
        /// AMOC thresholds: `lo:hi:n` or a comma-separated list.
        #[arg(long, conflicts_with = "threshold")]
        threshold_grid: Option<String>,
        /// Single threshold; writes a detection report instead of a curve.
        #[arg(long, allow_negative_numbers = true)]
        threshold: Option<f64>,
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Train, simulate, detect and evaluate end to end for each preset.
    Demo {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "DIR")]
        output: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: mlrss_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("mlrss: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
