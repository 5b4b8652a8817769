use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::output::*;
use super::report::aggregate;
use crate::baselines::{execute_plan, plan, PlanningInstance, Planner};
use crate::env::{Action, FarmSim};
use crate::error::{Error, Result};
use crate::nn::checkpoint;
use crate::rl::{JointStep, MultiAgentEnv};
use crate::rng::{derive_seed, stream};
use crate::trainer::{
    evaluate_episode, evaluation_episode_seed, init_agents, measure_latency, train, training_episode_seed, AgentPolicy,
    Algorithm, TrainingArtifacts,
};

const PLAN_STREAM: u64 = 0x9A11;

/// Wall-clock facts about one run, kept out of the CSV files so those stay
/// reproducible bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub algorithm: Method,
    pub seed: u64,
    pub config_hash: String,
    pub ok: bool,
    pub error: Option<String>,
    /// Learners: mean `select_action` latency. Planners: planning time per
    /// executed step.
    pub inference_ms: Option<f64>,
    pub wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub output_dir: PathBuf,
    pub runs: Vec<RunInfo>,
}

impl ExperimentOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &RunInfo> {
        self.runs.iter().filter(|r| !r.ok)
    }
}

pub fn run_dir(root: &Path, method: Method, seed: u64) -> PathBuf {
    root.join(method.name()).join(format!("seed_{seed}"))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(value).expect("serializable"))
}

/// Runs every (algorithm, seed) pair of the config, writes per-run files
/// under `harness.output_dir`, then the summary and comparison report. A
/// failed run is recorded in its `run.json` and the others still proceed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let root = cfg.harness.output_dir.clone();
    create_dir(&root)?;
    write_text(&root.join(CONFIG_ECHO), &cfg.to_toml())?;
    let mut runs = Vec::new();
    for &method in &cfg.harness.algorithms {
        for &seed in &cfg.harness.seeds {
            let info = run_one(cfg, method, seed, &run_dir(&root, method, seed));
            if let Some(e) = &info.error {
                warn!("{method} seed {seed} failed: {e}");
            }
            runs.push(info);
        }
    }
    write_json(&root.join(TIMING), &runs)?;
    aggregate(&root)?;
    Ok(ExperimentOutcome { output_dir: root, runs })
}

/// Runs one algorithm on one seed into `dir`; errors are captured in the
/// returned record (and its `run.json`) rather than propagated.
pub fn run_one(cfg: &ExperimentConfig, method: Method, seed: u64, dir: &Path) -> RunInfo {
    let start = Instant::now();
    let result = create_dir(dir).and_then(|_| {
        write_text(&dir.join(CONFIG_ECHO), &cfg.to_toml())?;
        match (method.learner(), method.planner()) {
            (Some(a), _) => run_learner(cfg, a, seed, dir),
            (_, Some(p)) => run_planner(cfg, p, seed, dir),
            _ => unreachable!("every method is a learner or a planner"),
        }
    });
    let (ok, error, inference_ms) = match result {
        Ok(ms) => (true, None, Some(ms)),
        Err(e) => (false, Some(e.to_string()), None),
    };
    let info = RunInfo {
        algorithm: method,
        seed,
        config_hash: cfg.hash(),
        ok,
        error,
        inference_ms,
        wall_s: start.elapsed().as_secs_f64(),
    };
    if let Err(e) = write_json(&dir.join(RUN_INFO), &info) {
        warn!("could not write run info: {e}");
    }
    info
}

fn action_name(a: Option<Action>) -> String {
    a.map_or_else(|| HOVER.to_string(), |a| a.name().to_string())
}

pub fn parse_action(s: &str) -> Result<Option<Action>> {
    if s == HOVER {
        return Ok(None);
    }
    s.parse::<Action>().map(Some).map_err(|e| Error::contract(format!("bad action `{s}`: {e}")))
}

struct TrajectoryLog<'a> {
    hash: &'a str,
    algorithm: &'a str,
    seed: u64,
    rows: Vec<TrajectoryRecord>,
}

impl TrajectoryLog<'_> {
    fn record(&mut self, episode: usize, episode_seed: u64, t: usize, sim: &FarmSim, actions: &[Option<Action>], step: &JointStep) {
        let env = sim.env();
        for (u, out) in step.agents.iter().enumerate() {
            let (row, col) = env.uavs[u].cell;
            self.rows.push(TrajectoryRecord {
                config_hash: self.hash.to_string(),
                algorithm: self.algorithm.to_string(),
                seed: self.seed,
                episode,
                episode_seed,
                step: t,
                uav: u,
                row,
                col,
                action: action_name(actions[u]),
                reward: out.reward,
                battery_j: env.remaining_battery(u),
            });
        }
    }
}

fn mean_return(traces: &[Vec<f64>]) -> f64 {
    traces.iter().map(|t| t.iter().sum::<f64>()).sum::<f64>() / traces.len().max(1) as f64
}

/// Greedy evaluation episodes of trained agents; returns metrics and
/// trajectory rows.
pub fn evaluate_learners(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    seed: u64,
    agents: &mut [AgentPolicy],
) -> Result<(Vec<MetricsRecord>, Vec<TrajectoryRecord>)> {
    let hash = cfg.hash();
    let farm = cfg.farm();
    let mut sim = FarmSim::new(&farm, seed, evaluation_episode_seed(seed, 0))?;
    let mut log = TrajectoryLog {
        hash: &hash,
        algorithm: algorithm.name(),
        seed,
        rows: Vec::new(),
    };
    let mut metrics = Vec::new();
    for episode in 0..cfg.trainer.eval_episodes {
        let ep_seed = evaluation_episode_seed(seed, episode as u64);
        let traces = evaluate_episode(&mut sim, agents, algorithm, ep_seed, |sim, _, view, _| {
            log.record(episode, ep_seed, view.t, sim, view.actions, view.step);
            Ok(())
        })?;
        let m = sim.env().episode_metrics(algorithm.name(), seed, episode)?;
        metrics.push(MetricsRecord::new(&hash, &m, mean_return(&traces)));
    }
    Ok((metrics, log.rows))
}

fn save_checkpoints(dir: &Path, agents: &[AgentPolicy]) -> Result<()> {
    let ck = dir.join(CHECKPOINTS);
    create_dir(&ck)?;
    for a in agents {
        for (role, net) in [("online", &a.q.online), ("target", &a.q.target), ("mid", &a.q.mid)] {
            checkpoint::save(net, &ck.join(format!("agent{}_{role}.qnet", a.id)))?;
        }
    }
    Ok(())
}

/// Trains a learner on the seed's farm and writes its files. Returns the
/// measured inference latency in milliseconds.
pub fn run_learner(cfg: &ExperimentConfig, algorithm: Algorithm, seed: u64, dir: &Path) -> Result<f64> {
    let hash = cfg.hash();
    let farm = cfg.farm();
    let mut sim = FarmSim::new(&farm, seed, training_episode_seed(seed, 1))?;
    info!("training {algorithm} on seed {seed}");
    let TrainingArtifacts { mut agents, curve, .. } = train(&mut sim, algorithm, &cfg.trainer, &cfg.imitation, seed)?;
    let curve: Vec<CurveRecord> = curve
        .into_iter()
        .map(|r| CurveRecord {
            config_hash: hash.clone(),
            algorithm: algorithm.name().to_string(),
            seed,
            episode: r.episode,
            agent: r.agent,
            reward: r.reward,
            mimicry: r.mimicry,
            epsilon: r.epsilon,
        })
        .collect();
    write_csv(&dir.join(LEARNING_CURVE), &curve)?;
    save_checkpoints(dir, &agents)?;
    let (metrics, trajectories) = evaluate_learners(cfg, algorithm, seed, &mut agents)?;
    write_csv(&dir.join(METRICS), &metrics)?;
    write_csv(&dir.join(TRAJECTORIES), &trajectories)?;

    sim.reset_episode(evaluation_episode_seed(seed, 0))?;
    let probe = sim.observe(0);
    measure_latency(&agents[0], algorithm, &probe, cfg.trainer.latency_calls)
}

/// Plans and executes each evaluation episode with a full-knowledge
/// planner. Returns planning milliseconds per executed step.
pub fn run_planner(cfg: &ExperimentConfig, planner: Planner, seed: u64, dir: &Path) -> Result<f64> {
    let hash = cfg.hash();
    let farm = cfg.farm();
    let mut sim = FarmSim::new(&farm, seed, evaluation_episode_seed(seed, 0))?;
    let mut log = TrajectoryLog {
        hash: &hash,
        algorithm: planner.name(),
        seed,
        rows: Vec::new(),
    };
    let mut metrics = Vec::new();
    let mut history = Vec::new();
    let mut planning_s = 0.0;
    let mut steps = 0usize;
    for episode in 0..cfg.trainer.eval_episodes {
        let ep_seed = evaluation_episode_seed(seed, episode as u64);
        sim.reset_episode(ep_seed)?;
        let t0 = Instant::now();
        let inst = PlanningInstance::from_env(sim.env(), cfg.baseline.min_weed_density);
        let route = plan(planner, &inst, sim.env(), &cfg.baseline, &mut stream(derive_seed(seed, episode as u64), PLAN_STREAM))?;
        planning_s += t0.elapsed().as_secs_f64();
        for (uav, h) in route.histories.iter().enumerate() {
            for (iteration, &best_cost) in h.iter().enumerate() {
                history.push(PlanningRecord {
                    config_hash: hash.clone(),
                    algorithm: planner.name().to_string(),
                    seed,
                    episode,
                    uav,
                    iteration,
                    best_cost,
                });
            }
        }
        let mut rewards = vec![0.0; inst.starts.len()];
        let m = execute_plan(&mut sim, &route, planner.name(), seed, episode, |sim, t, actions, step| {
            log.record(episode, ep_seed, t, sim, actions, step);
            for (r, a) in rewards.iter_mut().zip(&step.agents) {
                *r += a.reward;
            }
            Ok(())
        })?;
        steps += sim.env().time_step();
        metrics.push(MetricsRecord::new(&hash, &m, rewards.iter().sum::<f64>() / rewards.len() as f64));
    }
    write_csv(&dir.join(METRICS), &metrics)?;
    write_csv(&dir.join(TRAJECTORIES), &log.rows)?;
    write_csv(&dir.join(PLANNING), &history)?;
    Ok(planning_s * 1e3 / steps.max(1) as f64)
}

/// Loads the three networks of every agent from a run's checkpoint
/// directory, reading the run's config and algorithm from its parent.
pub fn load_checkpoint(checkpoint_dir: &Path) -> Result<(ExperimentConfig, RunInfo, Vec<AgentPolicy>)> {
    let run = checkpoint_dir
        .parent()
        .ok_or_else(|| Error::contract(format!("{} has no parent run directory", checkpoint_dir.display())))?;
    let cfg = ExperimentConfig::load(&run.join(CONFIG_ECHO), None)?;
    let info_path = run.join(RUN_INFO);
    let text = fs::read_to_string(&info_path).map_err(|e| Error::io(&info_path, e))?;
    let info: RunInfo = serde_json::from_str(&text).map_err(|e| Error::Checkpoint {
        path: info_path.clone(),
        msg: e.to_string(),
    })?;
    if info.algorithm.learner().is_none() {
        return Err(Error::contract(format!("{} runs have no checkpoints", info.algorithm)));
    }
    let obs_len = crate::env::observation_len(cfg.geometry.fov_cells);
    let mut agents = init_agents(cfg.scenario.n_uavs, obs_len, &cfg.trainer, info.seed)?;
    for a in agents.iter_mut() {
        let load = |role: &str| checkpoint::load(&checkpoint_dir.join(format!("agent{}_{role}.qnet", a.id)));
        let (online, target, mid) = (load("online")?, load("target")?, load("mid")?);
        if !online.same_shape(&a.q.online) || !target.same_shape(&online) || !mid.same_shape(&online) {
            return Err(Error::Checkpoint {
                path: checkpoint_dir.to_path_buf(),
                msg: format!("agent {} networks do not match the run's configuration", a.id),
            });
        }
        a.q.online = online;
        a.q.target = target;
        a.q.mid = mid;
    }
    Ok((cfg, info, agents))
}

/// Re-runs the greedy evaluation episodes of a saved learner.
pub fn evaluate_checkpoint(checkpoint_dir: &Path) -> Result<Vec<MetricsRecord>> {
    let (cfg, info, mut agents) = load_checkpoint(checkpoint_dir)?;
    let algorithm = info.algorithm.learner().expect("checked by load_checkpoint");
    Ok(evaluate_learners(&cfg, algorithm, info.seed, &mut agents)?.0)
}
