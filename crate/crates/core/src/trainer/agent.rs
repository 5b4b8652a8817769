use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::{Algorithm, TrainerConfig};
use crate::env::{Action, NUM_ACTIONS};
use crate::error::{Error, Result};
use crate::nn::{train_step, Adam, Mlp, ReplayBuffer, Transition};

/// Online, target and mid parameter sets of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct QTriplet {
    pub online: Mlp,
    pub target: Mlp,
    pub mid: Mlp,
    pub sigma2: f64,
}

impl QTriplet {
    /// Target and mid start as exact copies of the online network.
    pub fn new(online: Mlp, sigma2: f64) -> Self {
        Self {
            target: online.clone(),
            mid: online.clone(),
            online,
            sigma2,
        }
    }

    pub fn fingerprint(&self) -> [u64; 3] {
        [
            self.online.fingerprint(),
            self.target.fingerprint(),
            self.mid.fingerprint(),
        ]
    }
}

fn gaussian(sigma2: f64) -> Option<Normal<f64>> {
    (sigma2 > 0.0).then(|| Normal::new(0.0, sigma2.sqrt()).expect("finite positive std"))
}

/// Gaussian-mediated Q-values of two networks: the per-action mean of their
/// outputs, plus (unless `deterministic`) one independent N(0, sigma2) draw
/// per action.
pub fn mediated_q<R: Rng + ?Sized>(
    a: &Mlp,
    b: &Mlp,
    state: &[f64],
    sigma2: f64,
    rng: &mut R,
    deterministic: bool,
) -> Result<Vec<f64>> {
    let qa = a.forward(state)?;
    let qb = b.forward(state)?;
    let mut mean: Vec<f64> = qa.iter().zip(&qb).map(|(x, y)| (x + y) / 2.0).collect();
    if !deterministic {
        if let Some(noise) = gaussian(sigma2) {
            for q in &mut mean {
                *q += noise.sample(rng);
            }
        }
    }
    Ok(mean)
}

/// Batch form of [`mediated_q`] over precomputed network outputs.
fn mediate_batch<R: Rng + ?Sized>(qa: &Array2<f64>, qb: &Array2<f64>, sigma2: f64, rng: &mut R) -> Array2<f64> {
    let mut mean = (qa + qb) / 2.0;
    if let Some(noise) = gaussian(sigma2) {
        // row-major order, matching repeated single-state calls
        for q in mean.iter_mut() {
            *q += noise.sample(rng);
        }
    }
    mean
}

/// First index of the maximum; NaN never wins.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// How an agent picks actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    /// Uniform random action with probability epsilon, else greedy with
    /// stochastic mediation.
    EpsilonGreedy,
    /// Always greedy, mediation noise on.
    Greedy,
    /// Always greedy on the mediated mean.
    Deterministic,
}

#[derive(Debug, Clone)]
pub struct AgentPolicy {
    pub id: usize,
    pub q: QTriplet,
    pub optimizer: Adam,
    pub buffer: ReplayBuffer,
    pub epsilon: f64,
    pub gradient_steps: u64,
}

impl AgentPolicy {
    pub fn new<R: Rng + ?Sized>(id: usize, obs_len: usize, cfg: &TrainerConfig, rng: &mut R) -> Result<Self> {
        let online = Mlp::new(&cfg.layer_widths(obs_len, NUM_ACTIONS), rng)?;
        Ok(Self {
            id,
            optimizer: Adam::new(&online, cfg.optimizer.clone()),
            q: QTriplet::new(online, cfg.sigma2),
            buffer: ReplayBuffer::new(cfg.buffer_capacity)?,
            epsilon: cfg.epsilon_start,
            gradient_steps: 0,
        })
    }

    /// Q-values the agent acts on.
    pub fn action_values<R: Rng + ?Sized>(
        &self,
        algorithm: Algorithm,
        state: &[f64],
        deterministic: bool,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        match algorithm {
            Algorithm::Itdqn => mediated_q(&self.q.online, &self.q.mid, state, self.q.sigma2, rng, deterministic),
            Algorithm::Dqn | Algorithm::Ddqn => self.q.online.forward(state),
        }
    }
}

pub fn select_action<R: Rng + ?Sized>(
    agent: &AgentPolicy,
    algorithm: Algorithm,
    state: &[f64],
    mode: ActMode,
    rng: &mut R,
) -> Result<Action> {
    if mode == ActMode::EpsilonGreedy && rng.gen::<f64>() < agent.epsilon {
        return Ok(Action::ALL[rng.gen_range(0..NUM_ACTIONS)]);
    }
    let q = agent.action_values(algorithm, state, mode == ActMode::Deterministic, rng)?;
    Ok(Action::ALL[argmax(&q)])
}

fn stack<'a>(rows: impl Iterator<Item = &'a [f64]>, width: usize) -> Result<Array2<f64>> {
    let flat: Vec<f64> = rows
        .map(|r| {
            if r.len() == width {
                Ok(r)
            } else {
                Err(Error::contract(format!("state of length {} in a batch of width {width}", r.len())))
            }
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    let n = flat.len() / width.max(1);
    Array2::from_shape_vec((n, width), flat).map_err(|e| Error::contract(e.to_string()))
}

/// TD targets `y = r + (1 − d)·γ·Q_eval(s', a*)` for each transition.
///
/// - DQN: `Q_eval = target`, `a* = argmax target(s')`.
/// - DDQN: `a* = argmax online(s')`, evaluated by `target`.
/// - ITDQN: `a* = argmax` of the mediated online/mid values at `s'`,
///   evaluated by the mediated target/mid values.
pub fn td_targets<R: Rng + ?Sized>(
    q: &QTriplet,
    algorithm: Algorithm,
    batch: &[&Transition],
    gamma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Ok(Vec::new());
    }
    let next = stack(batch.iter().map(|t| t.next_state.as_slice()), q.online.input_len())?;
    let next = next.view();
    let (select, evaluate) = match algorithm {
        Algorithm::Dqn => {
            let t = q.target.forward_batch(next)?;
            (t.clone(), t)
        }
        Algorithm::Ddqn => (q.online.forward_batch(next)?, q.target.forward_batch(next)?),
        Algorithm::Itdqn => {
            let online = q.online.forward_batch(next)?;
            let target = q.target.forward_batch(next)?;
            let mid = q.mid.forward_batch(next)?;
            let select = mediate_batch(&online, &mid, q.sigma2, rng);
            let evaluate = mediate_batch(&target, &mid, q.sigma2, rng);
            (select, evaluate)
        }
    };
    Ok(batch
        .iter()
        .enumerate()
        .map(|(k, t)| {
            if t.done {
                return t.reward;
            }
            let row = select.row(k);
            let best = argmax(row.as_slice().expect("contiguous row"));
            t.reward + gamma * evaluate[[k, best]]
        })
        .collect())
}

/// One gradient step on a sampled batch, then soft updates of the target
/// and mid networks toward the online one.
pub fn learn<R: Rng + ?Sized>(
    agent: &mut AgentPolicy,
    algorithm: Algorithm,
    cfg: &TrainerConfig,
    rng: &mut R,
) -> Result<f64> {
    let batch = agent.buffer.sample(cfg.batch_size, rng)?;
    let targets = td_targets(&agent.q, algorithm, &batch, cfg.gamma, rng)?;
    let states = stack(batch.iter().map(|t| t.state.as_slice()), agent.q.online.input_len())?;
    let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
    let loss = train_step(
        &mut agent.q.online,
        &mut agent.optimizer,
        states.view(),
        &actions,
        &targets,
    )?;
    if !agent.q.online.is_finite() {
        return Err(Error::Divergence(format!("agent {} parameters became non-finite", agent.id)));
    }
    agent.q.target.soft_update_from(&agent.q.online, cfg.tau)?;
    agent.q.mid.soft_update_from(&agent.q.online, cfg.tau)?;
    agent.gradient_steps += 1;
    Ok(loss)
}

/// Stacks equal-length state vectors into a batch matrix.
pub fn stack_states(states: &[Vec<f64>]) -> Result<Array2<f64>> {
    let width = states.first().map_or(0, Vec::len);
    stack(states.iter().map(Vec::as_slice), width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Dense;
    use ndarray::{Array1, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A 1-input network whose output is `bias`, regardless of input.
    fn constant_net(values: [f64; 8]) -> Mlp {
        Mlp::from_layers(vec![Dense {
            weights: Array2::zeros((1, 8)),
            bias: Array1::from(values.to_vec()),
        }])
        .unwrap()
    }

    fn agent_with(q: QTriplet, epsilon: f64) -> AgentPolicy {
        AgentPolicy {
            id: 0,
            optimizer: Adam::new(&q.online, Default::default()),
            q,
            buffer: ReplayBuffer::new(16).unwrap(),
            epsilon,
            gradient_steps: 0,
        }
    }

    #[test]
    fn zero_variance_mediation_is_the_mean() {
        let a = constant_net([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let b = constant_net([3.0; 8]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = mediated_q(&a, &b, &[0.0], 0.0, &mut rng, false).unwrap();
        assert_eq!(q, vec![2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5]);
        let same = mediated_q(&a, &a, &[0.0], 0.0, &mut rng, false).unwrap();
        assert_eq!(same, a.forward(&[0.0]).unwrap());
    }

    #[test]
    fn dominant_output_is_always_chosen_greedily() {
        let mut values = [0.0; 8];
        values[5] = 10.0;
        let q = QTriplet::new(constant_net(values), 0.0);
        let agent = agent_with(q, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for alg in Algorithm::ALL {
            for _ in 0..50 {
                let a = select_action(&agent, alg, &[0.3], ActMode::EpsilonGreedy, &mut rng).unwrap();
                assert_eq!(a, Action::ALL[5]);
            }
        }
    }

    #[test]
    fn mediation_noise_has_the_configured_variance() {
        let a = constant_net([0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let b = constant_net([1.0; 8]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut sum = [0.0; 8];
        let mut sq = [0.0; 8];
        for _ in 0..n {
            let q = mediated_q(&a, &b, &[0.0], 0.01, &mut rng, false).unwrap();
            for k in 0..8 {
                let dev = q[k] - (k as f64 + 1.0) / 2.0;
                sum[k] += dev;
                sq[k] += dev * dev;
            }
        }
        for k in 0..8 {
            let mean = sum[k] / n as f64;
            let var = sq[k] / n as f64 - mean * mean;
            assert!((var - 0.01).abs() < 0.05 * 0.01, "action {k}: variance {var}");
        }
        let det = mediated_q(&a, &b, &[0.0], 0.01, &mut rng, true).unwrap();
        assert_eq!(det[3], 2.0);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let q = QTriplet::new(constant_net([0.0, 0.0, 9.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 0.0);
        let agent = agent_with(q, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 100_000;
        let mut counts = [0usize; 8];
        for _ in 0..n {
            counts[select_action(&agent, Algorithm::Itdqn, &[0.0], ActMode::EpsilonGreedy, &mut rng).unwrap().index()] += 1;
        }
        let expected = n as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 7 degrees of freedom, 0.1% critical value
        assert!(chi2 < 24.322, "chi-square {chi2}");
    }

    #[test]
    fn positive_scaling_keeps_the_greedy_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let online = Mlp::new(&[4, 6, 8], &mut rng).unwrap();
        let mid = Mlp::new(&[4, 6, 8], &mut rng).unwrap();
        let scale = |net: &Mlp, k: f64| {
            let mut n = net.clone();
            let last = n.layers_mut().last_mut().unwrap();
            last.weights *= k;
            last.bias *= k;
            n
        };
        for trial in 0..50 {
            let state: Vec<f64> = (0..4).map(|j| ((trial * 7 + j) as f64).sin()).collect();
            let base = agent_with(QTriplet { online: online.clone(), target: online.clone(), mid: mid.clone(), sigma2: 0.0 }, 0.0);
            let scaled = agent_with(
                QTriplet { online: scale(&online, 3.5), target: online.clone(), mid: scale(&mid, 3.5), sigma2: 0.0 },
                0.0,
            );
            for alg in Algorithm::ALL {
                let a = select_action(&base, alg, &state, ActMode::Greedy, &mut rng).unwrap();
                let b = select_action(&scaled, alg, &state, ActMode::Greedy, &mut rng).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn ties_break_to_the_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 0.0]), 1);
        assert_eq!(argmax(&[0.0; 8]), 0);
    }

    #[test]
    fn terminal_and_zero_discount_targets_are_the_reward() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = QTriplet::new(Mlp::new(&[3, 5, 8], &mut rng).unwrap(), 0.01);
        let t = Transition {
            state: vec![0.1, 0.2, 0.3],
            action: 1,
            reward: 0.7,
            next_state: vec![0.3, 0.2, 0.1],
            done: true,
        };
        let live = Transition { done: false, ..t.clone() };
        for alg in Algorithm::ALL {
            assert_eq!(td_targets(&q, alg, &[&t], 0.99, &mut rng).unwrap(), vec![0.7]);
            // sigma2 noise enters only through the discounted term
            let zero_gamma = td_targets(&q, alg, &[&live], 0.0, &mut rng).unwrap();
            assert_eq!(zero_gamma, vec![0.7]);
        }
    }

    #[test]
    fn hand_computed_triple_target() {
        // online prefers action 2; (target + mid) / 2 at action 2 is 0.5
        let mut online = [0.0; 8];
        online[2] = 5.0;
        let mut target = [0.0; 8];
        target[2] = 0.2;
        let mut mid = [0.0; 8];
        mid[2] = 0.8;
        let q = QTriplet {
            online: constant_net(online),
            target: constant_net(target),
            mid: constant_net(mid),
            sigma2: 0.0,
        };
        let t = Transition {
            state: vec![0.0],
            action: 0,
            reward: 1.0,
            next_state: vec![0.0],
            done: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = td_targets(&q, Algorithm::Itdqn, &[&t], 0.99, &mut rng).unwrap();
        assert!((y[0] - 1.495).abs() < 1e-12);
    }

    #[test]
    fn dqn_targets_ignore_the_online_network() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = QTriplet::new(Mlp::new(&[3, 6, 8], &mut rng).unwrap(), 0.0);
        let mut other = base.clone();
        other.online = Mlp::new(&[3, 6, 8], &mut rng).unwrap();
        let t = Transition {
            state: vec![0.0; 3],
            action: 0,
            reward: 0.5,
            next_state: vec![0.4, -0.2, 0.9],
            done: false,
        };
        let a = td_targets(&base, Algorithm::Dqn, &[&t], 0.9, &mut rng).unwrap();
        let b = td_targets(&other, Algorithm::Dqn, &[&t], 0.9, &mut rng).unwrap();
        assert_eq!(a, b);
        let expected = 0.5 + 0.9 * base.target.forward(&t.next_state).unwrap().iter().cloned().fold(f64::MIN, f64::max);
        assert!((a[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn learn_with_full_tau_syncs_all_three_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = TrainerConfig {
            batch_size: 4,
            buffer_capacity: 16,
            tau: 1.0,
            hidden_dim: 8,
            ..Default::default()
        };
        let mut agent = AgentPolicy::new(0, 3, &cfg, &mut rng).unwrap();
        for i in 0..6 {
            agent.buffer.push(Transition {
                state: vec![i as f64 * 0.1, 0.0, 1.0],
                action: i % 8,
                reward: 1.0,
                next_state: vec![0.0, i as f64 * 0.1, 1.0],
                done: i == 5,
            });
        }
        for alg in Algorithm::ALL {
            let loss = learn(&mut agent, alg, &cfg, &mut rng).unwrap();
            assert!(loss >= 0.0);
            assert_eq!(agent.q.target, agent.q.online);
            assert_eq!(agent.q.mid, agent.q.online);
        }
        assert_eq!(agent.gradient_steps, 3);
    }

    #[test]
    fn learn_needs_a_warm_buffer() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = TrainerConfig {
            batch_size: 4,
            buffer_capacity: 16,
            hidden_dim: 4,
            ..Default::default()
        };
        let mut agent = AgentPolicy::new(0, 2, &cfg, &mut rng).unwrap();
        assert!(learn(&mut agent, Algorithm::Itdqn, &cfg, &mut rng).is_err());
    }
}
