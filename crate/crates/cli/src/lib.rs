//! Driver for the `rnls` binary: configuration, subcommand dispatch and output.
//!
//! Every subcommand writes its CSV table and a `summary.json` of the form
//! `{command, config_echo, verdicts, timings, results}` into the output directory.

mod commands;
pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    SweepEps,
    VerifyScaling,
    ScanCxi,
    CheckNorm,
    OracleD,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Solve, Command::SweepEps, Command::VerifyScaling, Command::ScanCxi, Command::CheckNorm, Command::OracleD];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::SweepEps => "sweep-eps",
            Command::VerifyScaling => "verify-scaling",
            Command::ScanCxi => "scan-cxi",
            Command::CheckNorm => "check-norm",
            Command::OracleD => "oracle-d",
        }
    }

    /// CSV table written by the subcommand.
    pub fn table(self) -> &'static str {
        match self {
            Command::Solve => "solve.csv",
            Command::SweepEps => "sweep.csv",
            Command::VerifyScaling => "scaling.csv",
            Command::ScanCxi => "cxi.csv",
            Command::CheckNorm => "norm.csv",
            Command::OracleD => "oracle.csv",
        }
    }
}

/// Command-line overrides of the config.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub quiet: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Default)]
pub(crate) struct Report {
    verdicts: Vec<Verdict>,
    results: BTreeMap<String, Value>,
    solver_iterations: usize,
}

impl Report {
    fn verdict(&mut self, name: &str, pass: bool, detail: String) {
        self.verdicts.push(Verdict::new(name, pass, detail));
    }

    fn count_iterations(&mut self, n: usize) {
        self.solver_iterations += n;
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub verdicts: Vec<Verdict>,
    pub summary: Value,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// 0 when every verdict passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Loads the config, applies the flags and runs one subcommand on a dedicated thread pool.
pub fn run_subcommand(cmd: Command, flags: &Flags) -> Result<Outcome> {
    let mut cfg = RunConfig::load(&flags.config)?;
    if let Some(seed) = flags.seed {
        cfg.solver.seed = seed;
    }
    if let Some(t) = flags.threads {
        anyhow::ensure!(t >= 1, "--threads must be at least 1");
        cfg.output.threads = t;
    }
    if let Some(out) = &flags.out {
        cfg.output.dir = out.clone();
    }
    run_config(cmd, &cfg, flags.quiet)
}

pub fn run_config(cmd: Command, cfg: &RunConfig, quiet: bool) -> Result<Outcome> {
    let out = cfg.output.dir.clone();
    fs::create_dir_all(&out).with_context(|| format!("cannot create output directory {}", out.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.output.threads).build()?;
    let start = Instant::now();
    let mut report = Report::default();
    pool.install(|| commands::run(cmd, cfg, &out, &mut report))?;

    let echo: BTreeMap<&str, BTreeMap<String, String>> =
        cfg.sections().into_iter().map(|(name, keys)| (name, keys.into_iter().collect())).collect();
    let mut timings = json!({ "solver_iterations": report.solver_iterations, "threads": cfg.output.threads });
    if cfg.output.wall_clock {
        timings["wall_clock_seconds"] = json!(start.elapsed().as_secs_f64());
    }
    let summary = json!({
        "command": cmd.name(),
        "config_echo": echo,
        "verdicts": report.verdicts,
        "timings": timings,
        "results": report.results,
    });
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    if !quiet {
        for v in &report.verdicts {
            println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
        }
    }
    Ok(Outcome { out_dir: out, verdicts: report.verdicts, summary })
}

/// Machine-readable error report for stderr.
pub fn error_json(cmd: &str, err: &anyhow::Error) -> String {
    let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
    json!({ "command": cmd, "error": err.to_string(), "causes": chain }).to_string()
}
