//! Deep Q-learning with independent per-agent networks: DQN, double DQN and
//! the triple-network variant with Gaussian-mediated values and periodic
//! imitation of the best-performing agent.

mod agent;
mod config;
pub mod gridworld;
mod imitation;
mod train;

pub use agent::{argmax, learn, mediated_q, select_action, stack_states, td_targets, ActMode, AgentPolicy, QTriplet};
pub use config::{Algorithm, ImitationConfig, TrainerConfig};
pub use imitation::{elite_scores, evaluate_elite, imitate, ImitationSchedule};
pub use train::{
    evaluate_episode, evaluation_episode_seed, init_agents, measure_latency, run_episode, train, train_with_hook,
    training_episode_seed, CurveRow, EpisodeHook, MimicryEvent, StepView, TrainingArtifacts,
};
