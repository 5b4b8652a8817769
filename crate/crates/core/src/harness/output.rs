//! CSV row schemas. Every file carries a `config_hash` column naming the
//! configuration that produced it.

use std::fs::File;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EpisodeMetrics;

pub const LEARNING_CURVE: &str = "learning_curve.csv";
pub const METRICS: &str = "metrics.csv";
pub const TRAJECTORIES: &str = "trajectories.csv";
pub const PLANNING: &str = "planning.csv";
pub const SUMMARY: &str = "summary.csv";
pub const REPORT: &str = "report.csv";
pub const CONFIG_ECHO: &str = "config.toml";
pub const RUN_INFO: &str = "run.json";
pub const TIMING: &str = "timing.json";
pub const CHECKPOINTS: &str = "checkpoints";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub config_hash: String,
    pub algorithm: String,
    pub seed: u64,
    pub episode: u64,
    pub agent: usize,
    pub reward: f64,
    pub mimicry: bool,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub config_hash: String,
    pub algorithm: String,
    pub seed: u64,
    pub episode: usize,
    pub agents: usize,
    pub energy_j: f64,
    pub recognition_pct: f64,
    pub collection_pct: f64,
    pub completion_s: f64,
    /// Mean per-UAV return of the episode.
    pub reward: f64,
}

impl MetricsRecord {
    pub fn new(config_hash: &str, m: &EpisodeMetrics, reward: f64) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            algorithm: m.algorithm.clone(),
            seed: m.seed,
            episode: m.episode,
            agents: m.agents,
            energy_j: m.energy_j,
            recognition_pct: m.recognition_pct,
            collection_pct: m.collection_pct,
            completion_s: m.completion_s,
            reward,
        }
    }
}

/// One UAV in one evaluation step. `row`, `col` and `battery_j` are read
/// after the step; `action` is a compass move or `hover`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub config_hash: String,
    pub algorithm: String,
    /// Run seed; also the farm layout seed.
    pub seed: u64,
    pub episode: usize,
    pub episode_seed: u64,
    pub step: usize,
    pub uav: usize,
    pub row: usize,
    pub col: usize,
    pub action: String,
    pub reward: f64,
    pub battery_j: f64,
}

pub const HOVER: &str = "hover";

/// Best tour cost found so far by a planner, per UAV and iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningRecord {
    pub config_hash: String,
    pub algorithm: String,
    pub seed: u64,
    pub episode: usize,
    pub uav: usize,
    pub iteration: usize,
    pub best_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub config_hash: String,
    pub algorithm: String,
    pub runs: usize,
    /// Mean per-agent training return over the final window (learners only).
    pub final_reward_mean: Option<f64>,
    pub final_reward_std: Option<f64>,
    pub eval_reward_mean: f64,
    pub eval_reward_std: f64,
    pub energy_j_mean: f64,
    pub energy_j_std: f64,
    pub recognition_pct_mean: f64,
    pub recognition_pct_std: f64,
    pub collection_pct_mean: f64,
    pub collection_pct_std: f64,
    pub completion_s_mean: f64,
    pub completion_s_std: f64,
}

/// One line of the comparison report: an algorithm's figure (`kind =
/// algorithm`) or the difference of two algorithms' means (`kind = delta`,
/// `subject = "a-b"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub config_hash: String,
    pub kind: String,
    pub subject: String,
    pub metric: String,
    pub mean: f64,
    pub std: Option<f64>,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(Error::from)
}
