//! Experiment configuration, orchestration and CSV export.

mod config;
pub mod output;
mod report;
mod run;

pub use config::{ExperimentConfig, HarnessSection, Method, Preset, OUTPUT_DIR_ENV};
pub use report::{aggregate, collect_runs, compare_algorithms, final_window_reward, summarize, RunFigures};
pub use run::{
    evaluate_checkpoint, evaluate_learners, load_checkpoint, parse_action, run_dir, run_experiment, run_learner,
    run_one, run_planner, ExperimentOutcome, RunInfo,
};

use std::path::Path;

use crate::error::Result;
use output::SummaryRecord;

/// Re-aggregates an existing output directory.
pub fn export(run_root: &Path) -> Result<Vec<SummaryRecord>> {
    aggregate(run_root)
}
