//! A 4×4 deterministic single-agent grid with king moves, used to check
//! that the learners reach the optimal policy of a small known problem.
//!
//! The agent starts in the top-left cell; the bottom-right cell pays +1 and
//! ends the episode. The two inner diagonal cells cost −1 (the episode
//! continues) and every other move costs `STEP_COST`. Moving off the grid
//! leaves the agent in place. Episodes are cut after `MAX_STEPS` moves.

use crate::env::Action;
use crate::error::{Error, Result};
use crate::rl::{AgentStep, JointStep, MultiAgentEnv};

pub const SIZE: usize = 4;
pub const START: (usize, usize) = (0, 0);
pub const GOAL: (usize, usize) = (3, 3);
pub const TRAPS: [(usize, usize); 2] = [(1, 1), (2, 2)];
pub const GOAL_REWARD: f64 = 1.0;
pub const TRAP_REWARD: f64 = -1.0;
pub const STEP_COST: f64 = -0.04;
pub const MAX_STEPS: usize = 20;

#[derive(Debug, Clone)]
pub struct GridWorld {
    pos: (usize, usize),
    t: usize,
    finished: bool,
    episodes: u64,
}

impl Default for GridWorld {
    fn default() -> Self {
        Self::new()
    }
}

impl GridWorld {
    pub fn new() -> Self {
        Self {
            pos: START,
            t: 0,
            finished: false,
            episodes: 0,
        }
    }

    pub fn position(&self) -> (usize, usize) {
        self.pos
    }

    pub fn episodes_started(&self) -> u64 {
        self.episodes
    }

    /// Deterministic transition: next cell, reward, and whether it ends the task.
    pub fn transition(pos: (usize, usize), action: Action) -> ((usize, usize), f64, bool) {
        let (dr, dc) = action.offset();
        let (r, c) = (pos.0 as i64 + dr, pos.1 as i64 + dc);
        let next = if (0..SIZE as i64).contains(&r) && (0..SIZE as i64).contains(&c) {
            (r as usize, c as usize)
        } else {
            pos
        };
        if next == GOAL {
            (next, GOAL_REWARD, true)
        } else if TRAPS.contains(&next) {
            (next, TRAP_REWARD, false)
        } else {
            (next, STEP_COST, false)
        }
    }

    fn encode(pos: (usize, usize)) -> Vec<f64> {
        let mut v = vec![0.0; SIZE * SIZE];
        v[pos.0 * SIZE + pos.1] = 1.0;
        v
    }
}

impl MultiAgentEnv for GridWorld {
    fn n_agents(&self) -> usize {
        1
    }

    fn obs_len(&self) -> usize {
        SIZE * SIZE
    }

    fn reset_episode(&mut self, _seed: u64) -> Result<()> {
        self.pos = START;
        self.t = 0;
        self.finished = false;
        self.episodes += 1;
        Ok(())
    }

    fn alive(&self, _agent: usize) -> bool {
        !self.finished
    }

    fn observe(&self, _agent: usize) -> Vec<f64> {
        Self::encode(self.pos)
    }

    fn step_joint(&mut self, actions: &[Option<Action>]) -> Result<JointStep> {
        if self.finished {
            return Err(Error::contract("step after the episode ended"));
        }
        let [action] = actions else {
            return Err(Error::contract(format!("expected 1 action, got {}", actions.len())));
        };
        let (next, reward, terminal) = match action {
            Some(a) => Self::transition(self.pos, *a),
            None => (self.pos, STEP_COST, false),
        };
        self.pos = next;
        self.t += 1;
        let done = terminal || self.t >= MAX_STEPS;
        self.finished = done;
        Ok(JointStep {
            agents: vec![AgentStep {
                observation: Self::encode(next),
                reward,
                terminal,
                done,
                acted: true,
            }],
            episode_done: done,
        })
    }
}
