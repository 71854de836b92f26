use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rnls_cli::{error_json, run_subcommand, Command, Flags};

#[derive(Parser)]
#[command(name = "rnls", version, about = "Ground states of the regional fractional Schrödinger equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration
    #[arg(long, global = true, default_value = "configs/canonical.ini")]
    config: PathBuf,
    /// Output directory (overrides [output] dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for restarts and random sampling
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Ground state of the configured problem
    Solve,
    /// Concentration sweep over the epsilon list
    SweepEps,
    /// Frozen-coefficient levels against the scaling law
    VerifyScaling,
    /// Tabulate C(xi) with solver spot checks
    ScanCxi,
    /// Norm-equivalence audit on random fields
    CheckNorm,
    /// Extrapolated reference level D
    OracleD,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::SweepEps => Command::SweepEps,
        Cmd::VerifyScaling => Command::VerifyScaling,
        Cmd::ScanCxi => Command::ScanCxi,
        Cmd::CheckNorm => Command::CheckNorm,
        Cmd::OracleD => Command::OracleD,
    };
    let flags = Flags { config: cli.config, out: cli.out, seed: cli.seed, threads: cli.threads, quiet: cli.quiet };
    match run_subcommand(cmd, &flags) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("{}", error_json(cmd.name(), &e));
            ExitCode::from(2)
        }
    }
}
