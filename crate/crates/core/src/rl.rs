//! The interface learners use to drive an environment.

use crate::env::Action;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentStep {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// Bootstrapping stops here (the agent died or the task finished).
    /// A time-limit cut is not terminal.
    pub terminal: bool,
    /// The agent will not act again this episode.
    pub done: bool,
    /// The agent was alive and acted in this step.
    pub acted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointStep {
    pub agents: Vec<AgentStep>,
    pub episode_done: bool,
}

/// A cooperative environment where every live agent picks one of the eight
/// compass moves per step. Implementations own their step randomness, seeded
/// by `reset_episode`.
pub trait MultiAgentEnv {
    fn n_agents(&self) -> usize;
    fn obs_len(&self) -> usize;
    fn reset_episode(&mut self, seed: u64) -> Result<()>;
    fn alive(&self, agent: usize) -> bool;
    fn observe(&self, agent: usize) -> Vec<f64>;
    fn step_joint(&mut self, actions: &[Option<Action>]) -> Result<JointStep>;
}
