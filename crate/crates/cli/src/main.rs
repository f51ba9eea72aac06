// SPDX-License-Identifier: Apache-2.0

//! `expratio`: theory reports, allocations and design-based simulations for
//! stratified exponential ratio-type estimators.
//!
//! Exit status is 0 on success, 1 for unusable input and 2 when a
//! computation fails. Every failure prints exactly one `error:` line.

mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "expratio", version, about = "Stratified exponential ratio-type estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// First-order bias/MSE report, ratios and efficiency verdicts.
    Analyze(AnalyzeArgs),
    /// Empirical bias/MSE from repeated stratified SRSWOR draws.
    Simulate(SimulateArgs),
    /// Neyman allocation of a total sample size.
    Allocate(AllocateArgs),
    /// Theoretical MSE next to exact or Monte Carlo MSE.
    Validate(ValidateArgs),
    /// Synthetic unit CSV whose strata match aggregated moments.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Aggregated statistics (JSON/TOML) or unit CSV with header `stratum,y,x`.
    #[arg(long, short)]
    input: PathBuf,
    /// Comma-separated families to report besides `t`
    /// (sd, sk, us1, us2, gns1, gns2). Defaults to all six.
    #[arg(long, value_delimiter = ',')]
    family: Vec<String>,
    /// Custom coefficients CSV with header `stratum,a,b`.
    #[arg(long)]
    custom: Option<PathBuf>,
    /// Design CSV with header `stratum,n`, overriding the sample sizes.
    #[arg(long, conflicts_with = "n")]
    design: Option<PathBuf>,
    /// Total sample size, Neyman-allocated across strata.
    #[arg(long)]
    n: Option<u64>,
    /// Print shortest round-trip values instead of 4 decimals.
    #[arg(long)]
    full_precision: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Unit CSV with header `stratum,y,x`.
    #[arg(long)]
    population: PathBuf,
    /// Design CSV with header `stratum,n`.
    #[arg(long)]
    design: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated estimator names, e.g. `t,t_sd,cr,kc_sd,t_mk_opt,t_mk@1.5`.
    #[arg(long, value_delimiter = ',')]
    estimators: Vec<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct AllocateArgs {
    /// Aggregated statistics (JSON/TOML) or unit CSV.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Enumerate every sample.
    Exact,
    /// Monte Carlo replications.
    Mc,
    /// Exact when within the enumeration budget, Monte Carlo otherwise.
    Auto,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    population: PathBuf,
    #[arg(long)]
    design: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    estimators: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    full_precision: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Aggregated statistics giving the target moments.
    #[arg(long)]
    targets: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // Keep clap's message up to the usage block, on one line.
            let text = e.to_string();
            let message: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("error: {}", message.join(" ").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a).and_then(|s| commands::emit(&a.out.output, &s)),
        Command::Simulate(a) => commands::simulate(&a).and_then(|s| commands::emit(&a.out.output, &s)),
        Command::Allocate(a) => commands::allocate(&a).and_then(|s| commands::emit(&a.out.output, &s)),
        Command::Validate(a) => commands::validate(&a).and_then(|s| commands::emit(&a.out.output, &s)),
        Command::Generate(a) => commands::generate(&a).and_then(|s| commands::emit(&a.out.output, &s)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code())
        }
    }
}
