use rand_chacha::ChaCha8Rng;

use super::{observation_len, Action, FarmConfig, FarmEnv, StepOutcome, Termination};
use crate::error::Result;
use crate::rl::{AgentStep, JointStep, MultiAgentEnv};
use crate::rng::stream;

/// A farm environment bound to a fixed layout, plus the generator that
/// drives its stochastic data collection. Each episode re-draws the UAV start
/// cells and the collection stream from the episode seed, so an episode is
/// fully determined by `(config, layout_seed, episode seed, actions)`.
#[derive(Debug, Clone)]
pub struct FarmSim {
    config: FarmConfig,
    layout_seed: u64,
    env: FarmEnv,
    rng: ChaCha8Rng,
}

impl FarmSim {
    pub fn new(config: &FarmConfig, layout_seed: u64, episode_seed: u64) -> Result<Self> {
        let env = FarmEnv::reset_with_layout(config, layout_seed, episode_seed)?;
        Ok(Self {
            config: config.clone(),
            layout_seed,
            env,
            rng: stream(episode_seed, 0xC011),
        })
    }

    pub fn env(&self) -> &FarmEnv {
        &self.env
    }

    pub fn layout_seed(&self) -> u64 {
        self.layout_seed
    }

    pub fn step(&mut self, actions: &[Option<Action>]) -> Result<StepOutcome> {
        self.env.step(actions, &mut self.rng)
    }
}

impl MultiAgentEnv for FarmSim {
    fn n_agents(&self) -> usize {
        self.env.n_uavs()
    }

    fn obs_len(&self) -> usize {
        observation_len(self.config.geometry.fov_cells)
    }

    fn reset_episode(&mut self, seed: u64) -> Result<()> {
        self.env = FarmEnv::reset_with_layout(&self.config, self.layout_seed, seed)?;
        self.rng = stream(seed, 0xC011);
        Ok(())
    }

    fn alive(&self, agent: usize) -> bool {
        self.env.uavs[agent].alive
    }

    fn observe(&self, agent: usize) -> Vec<f64> {
        self.env.encode_observation(agent)
    }

    fn step_joint(&mut self, actions: &[Option<Action>]) -> Result<JointStep> {
        let out = self.step(actions)?;
        let finished = matches!(
            out.termination,
            Some(Termination::TasksComplete | Termination::AllDead)
        );
        let agents = out
            .uavs
            .into_iter()
            .enumerate()
            .map(|(id, u)| AgentStep {
                terminal: finished || !self.env.uavs[id].alive,
                observation: u.observation,
                reward: u.reward,
                done: u.done,
                acted: u.acted,
            })
            .collect();
        Ok(JointStep {
            agents,
            episode_done: out.episode_done,
        })
    }
}
