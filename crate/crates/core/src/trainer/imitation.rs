use serde::Serialize;

use super::agent::AgentPolicy;
use super::config::ImitationConfig;
use crate::error::{Error, Result};

/// Elite score `β1·mean + β2·variance` (population variance) per trace.
pub fn elite_scores(traces: &[Vec<f64>], beta1: f64, beta2: f64) -> Result<Vec<f64>> {
    traces
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if r.is_empty() {
                return Err(Error::contract(format!("agent {i} has an empty reward trace")));
            }
            let n = r.len() as f64;
            let mean = r.iter().sum::<f64>() / n;
            let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            Ok(beta1 * mean + beta2 * var)
        })
        .collect()
}

/// Index of the best elite score; ties go to the lowest agent id.
pub fn evaluate_elite(traces: &[Vec<f64>], beta1: f64, beta2: f64) -> Result<usize> {
    if traces.is_empty() {
        return Err(Error::contract("no agents to rank"));
    }
    let scores = elite_scores(traces, beta1, beta2)?;
    Ok(super::agent::argmax(&scores))
}

/// Blends every non-elite agent's three networks toward the elite's with
/// weight `vartheta`. Optimizer state and buffers are left alone.
pub fn imitate(policies: &mut [AgentPolicy], elite_id: usize, vartheta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&vartheta) {
        return Err(Error::contract(format!("imitation weight {vartheta} outside [0, 1]")));
    }
    let elite = policies
        .get(elite_id)
        .ok_or_else(|| Error::contract(format!("elite id {elite_id} out of range")))?
        .q
        .clone();
    for (i, p) in policies.iter_mut().enumerate() {
        if i == elite_id {
            continue;
        }
        p.q.online.soft_update_from(&elite.online, vartheta)?;
        p.q.target.soft_update_from(&elite.target, vartheta)?;
        p.q.mid.soft_update_from(&elite.mid, vartheta)?;
    }
    Ok(())
}

/// Copy weight and cycle length of the elite imitation mechanism.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImitationSchedule {
    pub vartheta: f64,
    pub delta: u64,
    /// Mimicry episodes held so far.
    pub rounds: u32,
    initial_vartheta: f64,
    config: ImitationConfig,
}

impl ImitationSchedule {
    pub fn new(config: &ImitationConfig) -> Self {
        Self {
            vartheta: config.vartheta,
            delta: config.delta,
            rounds: 0,
            initial_vartheta: config.vartheta,
            config: config.clone(),
        }
    }

    pub fn config(&self) -> &ImitationConfig {
        &self.config
    }

    pub fn is_mimicry_episode(&self, episode: u64) -> bool {
        episode > 0 && episode.is_multiple_of(self.delta)
    }

    pub fn advance(&mut self) {
        self.rounds += 1;
        self.vartheta = self.initial_vartheta * self.config.alpha1.powi(self.rounds as i32);
        self.delta = ((self.config.alpha2 * self.delta as f64).ceil() as u64).max(self.delta);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::TrainerConfig;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn policies(n: usize, seed: u64) -> Vec<AgentPolicy> {
        let cfg = TrainerConfig {
            hidden_dim: 6,
            batch_size: 2,
            buffer_capacity: 4,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|i| AgentPolicy::new(i, 3, &cfg, &mut rng).unwrap()).collect()
    }

    #[test]
    fn elite_examples() {
        assert_eq!(evaluate_elite(&[vec![1.0, 1.0], vec![0.0, 0.0]], 1.0, 0.01).unwrap(), 0);
        assert_eq!(evaluate_elite(&[vec![0.5, 2.0], vec![0.5, 2.0]], 1.0, 0.01).unwrap(), 0);
        let s = elite_scores(&[vec![0.0, 2.0], vec![1.0, 1.0]], 1.0, 0.01).unwrap();
        assert!((s[0] - 1.01).abs() < 1e-15 && s[1] == 1.0);
        assert_eq!(evaluate_elite(&[vec![1.0, 1.0], vec![0.0, 2.0]], 1.0, 0.01).unwrap(), 1);
        assert!(evaluate_elite(&[vec![1.0], vec![]], 1.0, 0.01).is_err());
    }

    proptest! {
        #[test]
        fn elite_is_shift_invariant(
            traces in prop::collection::vec(prop::collection::vec(-5i32..5, 1..6), 1..5),
            shift in -4i32..4,
        ) {
            // integer-valued traces keep the shifted means exact
            let base: Vec<Vec<f64>> = traces.iter().map(|t| t.iter().map(|&x| x as f64).collect()).collect();
            let shifted: Vec<Vec<f64>> = base.iter().map(|t| t.iter().map(|x| x + shift as f64).collect()).collect();
            prop_assert_eq!(
                evaluate_elite(&base, 1.0, 0.01).unwrap(),
                evaluate_elite(&shifted, 1.0, 0.01).unwrap()
            );
        }
    }

    #[test]
    fn full_weight_copies_the_elite() {
        let mut p = policies(3, 1);
        imitate(&mut p, 1, 1.0).unwrap();
        for agent in &p {
            assert_eq!(agent.q, p[1].q);
        }
    }

    #[test]
    fn zero_weight_is_a_no_op_and_elite_is_untouched() {
        let mut p = policies(3, 2);
        let before: Vec<_> = p.iter().map(|a| a.q.fingerprint()).collect();
        imitate(&mut p, 0, 0.0).unwrap();
        let after: Vec<_> = p.iter().map(|a| a.q.fingerprint()).collect();
        assert_eq!(before, after);
        imitate(&mut p, 0, 0.3).unwrap();
        assert_eq!(p[0].q.fingerprint(), before[0]);
        assert_ne!(p[2].q.fingerprint(), before[2]);
    }

    #[test]
    fn blend_is_entrywise_between_own_and_elite() {
        let mut p = policies(2, 3);
        let own: Vec<f64> = p[1].q.mid.params().collect();
        let elite: Vec<f64> = p[0].q.mid.params().collect();
        imitate(&mut p, 0, 0.37).unwrap();
        for ((x, a), b) in p[1].q.mid.params().zip(own).zip(elite) {
            assert!(x >= a.min(b) - 1e-15 && x <= a.max(b) + 1e-15);
        }
    }

    #[test]
    fn single_agent_and_identical_agents_are_unchanged() {
        let mut one = policies(1, 4);
        let fp = one[0].q.fingerprint();
        imitate(&mut one, 0, 0.5).unwrap();
        assert_eq!(one[0].q.fingerprint(), fp);

        let mut same = policies(1, 5);
        let copy = AgentPolicy { id: 1, ..same[0].clone() };
        same.push(copy);
        imitate(&mut same, 0, 0.5).unwrap();
        assert_eq!(same[0].q, same[1].q);
    }

    #[test]
    fn default_schedule_halves_rate_and_doubles_cycle() {
        let mut s = ImitationSchedule::new(&ImitationConfig::default());
        assert!(s.is_mimicry_episode(10) && !s.is_mimicry_episode(15) && !s.is_mimicry_episode(0));
        s.advance();
        assert_eq!((s.vartheta, s.delta), (0.05, 20));
    }

    #[test]
    fn schedule_is_power_and_ceiling_compounded() {
        let cfg = ImitationConfig {
            vartheta: 0.3,
            delta: 3,
            alpha1: 0.7,
            alpha2: 1.5,
            ..Default::default()
        };
        let mut s = ImitationSchedule::new(&cfg);
        let mut delta = 3u64;
        for k in 1..=12 {
            let (v0, d0) = (s.vartheta, s.delta);
            s.advance();
            delta = (1.5 * delta as f64).ceil() as u64;
            assert_eq!(s.vartheta, 0.3 * 0.7f64.powi(k));
            assert_eq!(s.delta, delta);
            assert!(s.vartheta <= v0 && s.delta >= d0);
        }
    }
}
