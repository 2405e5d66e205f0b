use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use dunkl_lab::exec::set_threads;
use dunkl_lab::experiment::{describe, emit_report, run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport};
use dunkl_lab::Execution;

#[derive(Parser, Debug)]
#[command(name = "dunkl-lab", version, about = "Dunkl analysis and eigenvalue counting experiments")]
struct Cli {
    /// TOML experiment description; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed, overriding `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads of the parallel pool.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run every loop sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    /// Print the CSV columns of the command and exit.
    #[arg(long, global = true)]
    describe: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Ball volumes and the constant c_k.
    Measure,
    /// The auxiliary function m on a lattice.
    AuxM,
    /// Stopping-time cubes.
    Decompose,
    /// Converged eigenvalues of -Δ_k + V.
    Spectrum,
    /// N(L, λ) against M(λ) with fitted constants.
    Sandwich,
    /// Fefferman–Phong ratio scan.
    Fp,
    /// Ground state against min m.
    Groundstate,
    /// Lower-bound bump certificates.
    Bumps,
    /// Rank-one kernel bound checks.
    Bounds,
    /// Every experiment listed in `experiments` (all when empty).
    Report,
}

impl Command {
    fn kinds(self, cfg: &ExperimentConfig) -> Vec<ExperimentKind> {
        match self {
            Command::Measure => vec![ExperimentKind::Measure],
            Command::AuxM => vec![ExperimentKind::AuxM],
            Command::Decompose => vec![ExperimentKind::Decompose],
            Command::Spectrum => vec![ExperimentKind::Spectrum],
            Command::Sandwich => vec![ExperimentKind::Sandwich],
            Command::Fp => vec![ExperimentKind::Fp],
            Command::Groundstate => vec![ExperimentKind::Groundstate],
            Command::Bumps => vec![ExperimentKind::Bumps],
            Command::Bounds => vec![ExperimentKind::Bounds],
            Command::Report if cfg.experiments.is_empty() => ExperimentKind::ALL.to_vec(),
            Command::Report => cfg.experiments.clone(),
        }
    }
}

const COMMON: &str = "<experiment>_summary.csv: key, value\n<experiment>_invariants.csv: invariant, passed, detail";

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_path(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let kinds = cli.command.kinds(&cfg);
    if cli.describe {
        for k in &kinds {
            println!("[{}]\n{}\n", k.name(), describe(*k));
        }
        println!("{COMMON}");
        return Ok(true);
    }
    if let Some(n) = cli.threads {
        set_threads(n);
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let setup = cfg.setup(exec)?;
    let mut all_passed = true;
    for kind in kinds {
        let report: ExperimentReport =
            run_experiment(kind, &setup, &cfg).with_context(|| format!("experiment {}", kind.name()))?;
        let passed = emit_report(&report, &out, cfg.output.svg)?;
        for (k, v) in &report.summary {
            println!("{}: {k} = {v}", kind.name());
        }
        for inv in &report.invariants {
            let status = if inv.passed { "ok" } else { "FAILED" };
            println!("{}: [{status}] {} ({})", kind.name(), inv.name, inv.detail);
        }
        for inv in report.failures() {
            eprintln!("{}: invariant failed: {}: {}", kind.name(), inv.name, inv.detail);
        }
        all_passed &= passed;
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
