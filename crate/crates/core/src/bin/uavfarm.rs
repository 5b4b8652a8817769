use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use uavfarm::baselines::Planner;
use uavfarm::harness::{self, output, ExperimentConfig, Method, Preset};
use uavfarm::trainer::Algorithm;

#[derive(Parser)]
#[command(name = "uavfarm", version, about = "Multi-UAV farmland experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train learners (or, without --algo, run every configured algorithm)
    /// and write per-run outputs plus the summary.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        algo: Option<Algorithm>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plan and execute routes with a full-knowledge planner.
    Baseline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        algo: Planner,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-run the greedy evaluation episodes of a saved run; prints
    /// metrics CSV to stdout.
    Evaluate {
        /// A run's `checkpoints` directory.
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Rebuild summary.csv and report.csv of an output directory.
    Export {
        #[arg(long)]
        run: PathBuf,
    },
}

fn load(config: Option<&Path>, preset: Option<Preset>) -> uavfarm::Result<ExperimentConfig> {
    match config {
        Some(path) => ExperimentConfig::load(path, preset),
        None => {
            let mut cfg = ExperimentConfig::from_toml_str("", preset)?;
            if let Some(dir) = std::env::var_os(harness::OUTPUT_DIR_ENV) {
                cfg.harness.output_dir = dir.into();
            }
            Ok(cfg)
        }
    }
}

fn experiment(mut cfg: ExperimentConfig, methods: Option<Vec<Method>>, seed: Option<u64>) -> uavfarm::Result<bool> {
    if let Some(m) = methods {
        cfg.harness.algorithms = m;
    }
    if let Some(s) = seed {
        cfg.harness.seeds = vec![s];
    }
    let outcome = harness::run_experiment(&cfg)?;
    for r in &outcome.runs {
        let status = if r.ok { "ok".to_string() } else { format!("FAILED: {}", r.error.as_deref().unwrap_or("")) };
        println!("{:>5} seed {:<4} {:>8.1}s  {status}", r.algorithm.name(), r.seed, r.wall_s);
    }
    println!("outputs in {}", outcome.output_dir.display());
    let clean = outcome.failures().next().is_none();
    Ok(clean)
}

fn run(cli: Cli) -> uavfarm::Result<bool> {
    match cli.command {
        Command::Train { config, preset, algo, seed } => {
            let cfg = load(config.as_deref(), preset)?;
            experiment(cfg, algo.map(|a| vec![Method::from(a)]), seed)
        }
        Command::Baseline { config, preset, algo, seed } => {
            let cfg = load(config.as_deref(), preset)?;
            experiment(cfg, Some(vec![Method::from(algo)]), seed)
        }
        Command::Evaluate { checkpoint } => {
            let rows = harness::evaluate_checkpoint(&checkpoint)?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| uavfarm::Error::io("<stdout>", e))?;
            Ok(true)
        }
        Command::Export { run } => {
            let summary = harness::export(&run)?;
            println!("{} algorithms -> {}", summary.len(), run.join(output::SUMMARY).display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
