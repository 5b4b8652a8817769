use std::time::Instant;

use log::{debug, info};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::agent::{learn, select_action, ActMode, AgentPolicy};
use super::config::{Algorithm, ImitationConfig, TrainerConfig};
use super::imitation::{evaluate_elite, imitate, ImitationSchedule};
use crate::env::Action;
use crate::error::{Error, Result};
use crate::nn::Transition;
use crate::rl::{JointStep, MultiAgentEnv};
use crate::rng::{derive_seed, stream};

const INIT_STREAM: u64 = 0x1417;
const RUN_STREAM: u64 = 0x7A41;
const TRAIN_EPISODES: u64 = 0x0001_0000_0000;
const EVAL_EPISODES: u64 = 0x0002_0000_0000;
const LATENCY_STREAM: u64 = 0x1A7E;

/// Seed of training episode `episode` (1-based) of a run.
pub fn training_episode_seed(run_seed: u64, episode: u64) -> u64 {
    derive_seed(run_seed, TRAIN_EPISODES + episode)
}

/// Seed of greedy evaluation episode `index` of a run.
pub fn evaluation_episode_seed(run_seed: u64, index: u64) -> u64 {
    derive_seed(run_seed, EVAL_EPISODES + index)
}

/// What a step callback gets to see.
pub struct StepView<'a> {
    /// Zero-based step index within the episode.
    pub t: usize,
    /// Observations the actions were chosen from (`None` for dead agents).
    pub states: &'a [Option<Vec<f64>>],
    pub actions: &'a [Option<Action>],
    pub step: &'a JointStep,
}

/// Rolls out one episode from `seed`, every live agent acting by `mode`.
/// Returns each agent's per-step reward trace (steps it acted in).
pub fn run_episode<E, R, F>(
    env: &mut E,
    agents: &mut [AgentPolicy],
    algorithm: Algorithm,
    mode: ActMode,
    seed: u64,
    rng: &mut R,
    mut on_step: F,
) -> Result<Vec<Vec<f64>>>
where
    E: MultiAgentEnv,
    R: Rng,
    F: FnMut(&E, &mut [AgentPolicy], &StepView<'_>, &mut R) -> Result<()>,
{
    if agents.len() != env.n_agents() {
        return Err(Error::contract(format!(
            "{} policies for {} agents",
            agents.len(),
            env.n_agents()
        )));
    }
    env.reset_episode(seed)?;
    let n = agents.len();
    let mut traces = vec![Vec::new(); n];
    for t in 0.. {
        let states: Vec<Option<Vec<f64>>> = (0..n).map(|i| env.alive(i).then(|| env.observe(i))).collect();
        let actions = states
            .iter()
            .zip(agents.iter())
            .map(|(s, a)| s.as_ref().map(|s| select_action(a, algorithm, s, mode, rng)).transpose())
            .collect::<Result<Vec<_>>>()?;
        let step = env.step_joint(&actions)?;
        for (trace, a) in traces.iter_mut().zip(&step.agents) {
            if a.acted {
                trace.push(a.reward);
            }
        }
        let view = StepView {
            t,
            states: &states,
            actions: &actions,
            step: &step,
        };
        on_step(env, agents, &view, rng)?;
        if step.episode_done {
            break;
        }
    }
    Ok(traces)
}

/// Per-agent return of one training episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub episode: u64,
    pub agent: usize,
    pub reward: f64,
    pub mimicry: bool,
    pub epsilon: f64,
}

/// State of the imitation schedule after one mimicry episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MimicryEvent {
    pub episode: u64,
    pub elite: usize,
    pub vartheta_used: f64,
    pub vartheta_next: f64,
    pub delta_next: u64,
}

#[derive(Debug, Clone)]
pub struct TrainingArtifacts {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub agents: Vec<AgentPolicy>,
    pub curve: Vec<CurveRow>,
    pub mimicry: Vec<MimicryEvent>,
    pub gradient_steps: u64,
}

impl TrainingArtifacts {
    /// Mean per-agent episode return over the last `window` learning
    /// (non-mimicry) episodes.
    pub fn final_mean_reward(&self, window: usize) -> f64 {
        let mut episodes: Vec<u64> = self.curve.iter().filter(|r| !r.mimicry).map(|r| r.episode).collect();
        episodes.dedup();
        let keep = &episodes[episodes.len().saturating_sub(window)..];
        let Some(&first) = keep.first() else {
            return f64::NAN;
        };
        let rows: Vec<f64> = self
            .curve
            .iter()
            .filter(|r| !r.mimicry && r.episode >= first)
            .map(|r| r.reward)
            .collect();
        rows.iter().sum::<f64>() / rows.len() as f64
    }
}

/// Builds one independently initialised policy per agent.
pub fn init_agents(n: usize, obs_len: usize, cfg: &TrainerConfig, seed: u64) -> Result<Vec<AgentPolicy>> {
    (0..n)
        .map(|i| AgentPolicy::new(i, obs_len, cfg, &mut stream(seed, INIT_STREAM + i as u64)))
        .collect()
}

/// Callback invoked after each finished training episode.
pub type EpisodeHook<'a> = dyn FnMut(&[CurveRow]) + 'a;

/// Trains one policy per agent of `env` for `cfg.max_episodes` episodes.
pub fn train<E: MultiAgentEnv>(
    env: &mut E,
    algorithm: Algorithm,
    cfg: &TrainerConfig,
    imitation: &ImitationConfig,
    seed: u64,
) -> Result<TrainingArtifacts> {
    train_with_hook(env, algorithm, cfg, imitation, seed, &mut |_| {})
}

pub fn train_with_hook<E: MultiAgentEnv>(
    env: &mut E,
    algorithm: Algorithm,
    cfg: &TrainerConfig,
    imitation: &ImitationConfig,
    seed: u64,
    hook: &mut EpisodeHook<'_>,
) -> Result<TrainingArtifacts> {
    cfg.validate()?;
    imitation.validate()?;
    let mut agents = init_agents(env.n_agents(), env.obs_len(), cfg, seed)?;
    let mut rng: ChaCha8Rng = stream(seed, RUN_STREAM);
    let mut schedule = ImitationSchedule::new(imitation);
    let mut curve = Vec::with_capacity(cfg.max_episodes * agents.len());
    let mut events = Vec::new();

    for episode in 1..=cfg.max_episodes as u64 {
        let epsilon = cfg.epsilon_after(episode as usize - 1);
        for a in agents.iter_mut() {
            a.epsilon = epsilon;
        }
        let ep_seed = training_episode_seed(seed, episode);
        let mimicry = algorithm == Algorithm::Itdqn && schedule.is_mimicry_episode(episode);
        let traces = if mimicry {
            let traces = run_episode(env, &mut agents, algorithm, ActMode::Greedy, ep_seed, &mut rng, |_, _, _, _| Ok(()))?;
            let elite = evaluate_elite(&traces, imitation.beta1, imitation.beta2)?;
            let used = schedule.vartheta;
            imitate(&mut agents, elite, used)?;
            schedule.advance();
            debug!("episode {episode}: mimicry, elite {elite}, next delta {}", schedule.delta);
            events.push(MimicryEvent {
                episode,
                elite,
                vartheta_used: used,
                vartheta_next: schedule.vartheta,
                delta_next: schedule.delta,
            });
            traces
        } else {
            run_episode(
                env,
                &mut agents,
                algorithm,
                ActMode::EpsilonGreedy,
                ep_seed,
                &mut rng,
                |_, agents, view, rng| {
                    for (i, agent) in agents.iter_mut().enumerate() {
                        let (Some(state), Some(action)) = (&view.states[i], view.actions[i]) else {
                            continue;
                        };
                        let out = &view.step.agents[i];
                        agent.buffer.push(Transition {
                            state: state.clone(),
                            action: action.index(),
                            reward: out.reward,
                            next_state: out.observation.clone(),
                            done: out.terminal,
                        });
                        if agent.buffer.len() >= cfg.batch_size {
                            learn(agent, algorithm, cfg, rng)?;
                        }
                    }
                    Ok(())
                },
            )?
        };
        let start = curve.len();
        for (agent, trace) in traces.iter().enumerate() {
            curve.push(CurveRow {
                episode,
                agent,
                reward: trace.iter().sum(),
                mimicry,
                epsilon,
            });
        }
        hook(&curve[start..]);
        if episode % 50 == 0 {
            let mean = curve[start..].iter().map(|r| r.reward).sum::<f64>() / traces.len() as f64;
            info!("{algorithm} seed {seed}: episode {episode}, mean return {mean:.3}, epsilon {epsilon:.3}");
        }
    }
    for a in agents.iter_mut() {
        a.epsilon = cfg.epsilon_after(cfg.max_episodes);
    }
    let gradient_steps = agents.iter().map(|a| a.gradient_steps).sum();
    Ok(TrainingArtifacts {
        algorithm,
        seed,
        agents,
        curve,
        mimicry: events,
        gradient_steps,
    })
}

/// Greedy deterministic rollout; returns per-agent reward traces.
pub fn evaluate_episode<E, F>(
    env: &mut E,
    agents: &mut [AgentPolicy],
    algorithm: Algorithm,
    seed: u64,
    on_step: F,
) -> Result<Vec<Vec<f64>>>
where
    E: MultiAgentEnv,
    F: FnMut(&E, &mut [AgentPolicy], &StepView<'_>, &mut ChaCha8Rng) -> Result<()>,
{
    // deterministic mode draws nothing, but the signature wants a generator
    let mut rng = stream(seed, RUN_STREAM);
    run_episode(env, agents, algorithm, ActMode::Deterministic, seed, &mut rng, on_step)
}

/// Mean wall-clock milliseconds of one `select_action` call in the
/// acting mode used during training.
pub fn measure_latency(agent: &AgentPolicy, algorithm: Algorithm, state: &[f64], calls: usize) -> Result<f64> {
    let mut rng = stream(agent.id as u64, LATENCY_STREAM);
    let mut probe = agent.clone();
    probe.epsilon = 0.0;
    let calls = calls.max(1);
    let start = Instant::now();
    let mut sink = 0usize;
    for _ in 0..calls {
        sink += select_action(&probe, algorithm, state, ActMode::Greedy, &mut rng)?.index();
    }
    let elapsed = start.elapsed();
    std::hint::black_box(sink);
    Ok(elapsed.as_secs_f64() * 1e3 / calls as f64)
}
