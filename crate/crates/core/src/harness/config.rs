use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{BaselineConfig, Planner};
use crate::env::{FarmConfig, GridGeometry, RewardWeights, ScenarioParams};
use crate::error::{Error, Result};
use crate::physics::{CommParams, PhysicsParams};
use crate::trainer::{Algorithm, ImitationConfig, TrainerConfig};

/// Environment variable that replaces `harness.output_dir`.
pub const OUTPUT_DIR_ENV: &str = "UAVFARM_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Full-size farm and training budget.
    #[default]
    Paper,
    /// 10×10 farm, 2 UAVs, 16 sensors, 300 episodes, 5 seeds.
    Desk,
    /// 6×6 farm, 2 UAVs, 6 sensors, 50 episodes, 2 seeds.
    Toy,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Paper, Preset::Desk, Preset::Toy];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
            Preset::Toy => "toy",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown preset `{s}` (expected paper, desk or toy)"))
    }
}

/// Any algorithm the harness can run: a learner or a planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dqn,
    Ddqn,
    Itdqn,
    Aco,
    Pso,
    Ga,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Dqn, Method::Ddqn, Method::Itdqn, Method::Aco, Method::Pso, Method::Ga];

    pub fn learner(self) -> Option<Algorithm> {
        match self {
            Method::Dqn => Some(Algorithm::Dqn),
            Method::Ddqn => Some(Algorithm::Ddqn),
            Method::Itdqn => Some(Algorithm::Itdqn),
            _ => None,
        }
    }

    pub fn planner(self) -> Option<Planner> {
        match self {
            Method::Aco => Some(Planner::Aco),
            Method::Pso => Some(Planner::Pso),
            Method::Ga => Some(Planner::Ga),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Dqn => "dqn",
            Method::Ddqn => "ddqn",
            Method::Itdqn => "itdqn",
            Method::Aco => "aco",
            Method::Pso => "pso",
            Method::Ga => "ga",
        }
    }
}

impl From<Algorithm> for Method {
    fn from(a: Algorithm) -> Self {
        match a {
            Algorithm::Dqn => Method::Dqn,
            Algorithm::Ddqn => Method::Ddqn,
            Algorithm::Itdqn => Method::Itdqn,
        }
    }
}

impl From<Planner> for Method {
    fn from(p: Planner) -> Self {
        match p {
            Planner::Aco => Method::Aco,
            Planner::Pso => Method::Pso,
            Planner::Ga => Method::Ga,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected dqn, ddqn, itdqn, aco, pso or ga)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessSection {
    pub algorithms: Vec<Method>,
    /// One run per (algorithm, seed). The seed also fixes the farm layout.
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl Default for HarnessSection {
    fn default() -> Self {
        Self {
            algorithms: Method::ALL.to_vec(),
            seeds: vec![1],
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Everything one experiment needs. Unknown keys are rejected at any depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub geometry: GridGeometry,
    pub scenario: ScenarioParams,
    pub physics: PhysicsParams,
    pub comm: CommParams,
    pub reward: RewardWeights,
    pub trainer: TrainerConfig,
    pub imitation: ImitationConfig,
    pub baseline: BaselineConfig,
    pub harness: HarnessSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset(Preset::Paper)
    }
}

impl ExperimentConfig {
    fn preset_episodes(preset: Preset) -> usize {
        match preset {
            Preset::Paper => TrainerConfig::default().max_episodes,
            Preset::Desk => 300,
            Preset::Toy => 50,
        }
    }

    /// Defaults for a scale preset.
    pub fn preset(preset: Preset) -> Self {
        let mut c = Self {
            preset,
            geometry: GridGeometry::default(),
            scenario: ScenarioParams::default(),
            physics: PhysicsParams::default(),
            comm: CommParams::default(),
            reward: RewardWeights::default(),
            trainer: TrainerConfig::default(),
            imitation: ImitationConfig::default(),
            baseline: BaselineConfig::default(),
            harness: HarnessSection::default(),
        };
        match preset {
            Preset::Paper => {}
            Preset::Desk => {
                c.geometry.grid_count = 10;
                c.scenario.n_uavs = 2;
                c.scenario.n_sensors = 16;
                c.scenario.max_steps = 100;
                c.trainer.max_episodes = Self::preset_episodes(preset);
                c.trainer.hidden_dim = 64;
                c.trainer.batch_size = 64;
                c.trainer.buffer_capacity = 20_000;
                c.harness.seeds = (1..=5).collect();
            }
            Preset::Toy => {
                c.geometry.grid_count = 6;
                c.scenario.n_uavs = 2;
                c.scenario.n_sensors = 6;
                c.scenario.max_steps = 40;
                c.trainer.max_episodes = Self::preset_episodes(preset);
                c.trainer.hidden_dim = 32;
                c.trainer.batch_size = 32;
                c.trainer.buffer_capacity = 4_096;
                c.harness.seeds = vec![1, 2];
            }
        }
        // shorter presets compress the exploration schedule so that ε ends
        // where the full-length run would
        let full = Self::preset_episodes(Preset::Paper) as f64;
        c.trainer.epsilon_decay = TrainerConfig::default()
            .epsilon_decay
            .powf(full / c.trainer.max_episodes as f64);
        c
    }

    pub fn farm(&self) -> FarmConfig {
        FarmConfig {
            geometry: self.geometry.clone(),
            scenario: self.scenario.clone(),
            physics: self.physics.clone(),
            comm: self.comm.clone(),
            reward: self.reward.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.farm().validate()?;
        self.trainer.validate()?;
        self.imitation.validate()?;
        self.baseline.validate()?;
        if self.harness.algorithms.is_empty() {
            return Err(Error::config("harness.algorithms", "must name at least one algorithm"));
        }
        if self.harness.seeds.is_empty() {
            return Err(Error::config("harness.seeds", "must list at least one seed"));
        }
        if self.harness.seeds.iter().any(|&s| s > i64::MAX as u64) {
            return Err(Error::config("harness.seeds", "seeds must fit in a signed 64-bit integer"));
        }
        let mut seen = self.harness.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.harness.seeds.len() {
            return Err(Error::config("harness.seeds", "seeds must be distinct"));
        }
        Ok(())
    }

    /// The fully resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// Hex SHA-256 of everything except the `[harness]` section, which
    /// only selects runs and where they are written.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.harness = HarnessSection::default();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    /// Parses TOML text on top of the defaults of `preset_override`, or of
    /// the file's own `preset` key, or of the paper preset.
    pub fn from_toml_str(text: &str, preset_override: Option<Preset>) -> Result<Self> {
        let file: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config(
            e.span().map_or_else(|| "<file>".into(), |s| format!("<file>@{}..{}", s.start, s.end)),
            e.message().to_string(),
        ))?;
        let preset = match preset_override {
            Some(p) => p,
            None => match file.get("preset") {
                None => Preset::Paper,
                Some(toml::Value::String(s)) => s.parse().map_err(|e: String| Error::config("preset", e))?,
                Some(other) => return Err(Error::config("preset", format!("expected a string, got {other}"))),
            },
        };
        let mut merged = toml::Table::try_from(Self::preset(preset)).expect("defaults serialize");
        deep_merge(&mut merged, file);
        merged.insert("preset".into(), toml::Value::String(preset.name().into()));
        let cfg: Self = serde_path_to_error::deserialize(toml::Value::Table(merged)).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; see [`Self::from_toml_str`]. The output directory
    /// may be replaced through the environment variable named by
    /// [`OUTPUT_DIR_ENV`].
    pub fn load(path: &Path, preset_override: Option<Preset>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, preset_override)?;
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            cfg.harness.output_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }
}

fn deep_merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => deep_merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
