use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::AdamConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dqn,
    Ddqn,
    Itdqn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Dqn, Algorithm::Ddqn, Algorithm::Itdqn];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dqn => "dqn",
            Algorithm::Ddqn => "ddqn",
            Algorithm::Itdqn => "itdqn",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected dqn, ddqn or itdqn)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    /// Discount factor in (0, 1].
    pub gamma: f64,
    pub batch_size: usize,
    /// Soft-update rate of the target and mid networks.
    pub tau: f64,
    pub hidden_dim: usize,
    pub hidden_layers: usize,
    pub max_episodes: usize,
    pub buffer_capacity: usize,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    pub epsilon_decay: f64,
    /// Variance of the Gaussian mediation of Q-values (triple network only).
    pub sigma2: f64,
    pub optimizer: AdamConfig,
    /// Greedy evaluation episodes run after training.
    pub eval_episodes: usize,
    /// `select_action` calls timed for the inference latency figure.
    pub latency_calls: usize,
    /// Episodes at the end of training averaged for the final reward.
    pub final_window: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            batch_size: 128,
            tau: 0.01,
            hidden_dim: 256,
            hidden_layers: 2,
            max_episodes: 1000,
            buffer_capacity: 1 << 16,
            epsilon_start: 1.0,
            epsilon_min: 0.01,
            epsilon_decay: 0.995,
            sigma2: 0.01,
            optimizer: AdamConfig::default(),
            eval_episodes: 10,
            latency_calls: 10_000,
            final_window: 50,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("trainer.gamma", format!("must be in (0, 1], got {}", self.gamma)));
        }
        if self.batch_size == 0 {
            return Err(Error::config("trainer.batch_size", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::config("trainer.tau", "must be in [0, 1]"));
        }
        if self.hidden_dim == 0 {
            return Err(Error::config("trainer.hidden_dim", "must be >= 1"));
        }
        if self.buffer_capacity < self.batch_size {
            return Err(Error::config("trainer.buffer_capacity", "must be >= batch_size"));
        }
        if !(0.0..=1.0).contains(&self.epsilon_min) {
            return Err(Error::config("trainer.epsilon_min", "must be in [0, 1]"));
        }
        if !(self.epsilon_min..=1.0).contains(&self.epsilon_start) {
            return Err(Error::config("trainer.epsilon_start", "must be in [epsilon_min, 1]"));
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return Err(Error::config("trainer.epsilon_decay", "must be in (0, 1]"));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::config("trainer.sigma2", "must be >= 0"));
        }
        let opt = &self.optimizer;
        if !(opt.learning_rate > 0.0 && opt.learning_rate.is_finite()) {
            return Err(Error::config("trainer.optimizer.learning_rate", "must be > 0"));
        }
        if !(0.0..1.0).contains(&opt.beta1) {
            return Err(Error::config("trainer.optimizer.beta1", "must be in [0, 1)"));
        }
        if !(0.0..1.0).contains(&opt.beta2) {
            return Err(Error::config("trainer.optimizer.beta2", "must be in [0, 1)"));
        }
        if !(opt.epsilon > 0.0) {
            return Err(Error::config("trainer.optimizer.epsilon", "must be > 0"));
        }
        if opt.max_grad_norm.is_some_and(|m| !(m > 0.0)) {
            return Err(Error::config("trainer.optimizer.max_grad_norm", "must be > 0 when set"));
        }
        if self.final_window == 0 {
            return Err(Error::config("trainer.final_window", "must be >= 1"));
        }
        Ok(())
    }

    /// Exploration probability after `episodes` completed episodes.
    pub fn epsilon_after(&self, episodes: usize) -> f64 {
        let k = i32::try_from(episodes).unwrap_or(i32::MAX);
        (self.epsilon_start * self.epsilon_decay.powi(k)).max(self.epsilon_min)
    }

    pub fn layer_widths(&self, obs_len: usize, n_actions: usize) -> Vec<usize> {
        let mut w = vec![obs_len];
        w.extend(std::iter::repeat_n(self.hidden_dim, self.hidden_layers));
        w.push(n_actions);
        w
    }
}

/// Elite imitation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImitationConfig {
    /// Initial soft-copy weight toward the elite.
    pub vartheta: f64,
    /// Initial mimicry cycle, in episodes.
    pub delta: u64,
    /// Multiplier applied to the copy weight after each mimicry episode.
    pub alpha1: f64,
    /// Multiplier applied to the cycle after each mimicry episode.
    pub alpha2: f64,
    /// Weight of the reward mean in the elite score.
    pub beta1: f64,
    /// Weight of the reward variance in the elite score.
    pub beta2: f64,
}

impl Default for ImitationConfig {
    fn default() -> Self {
        Self {
            vartheta: 0.1,
            delta: 10,
            alpha1: 0.5,
            alpha2: 2.0,
            beta1: 1.0,
            beta2: 0.01,
        }
    }
}

impl ImitationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.vartheta) {
            return Err(Error::config("imitation.vartheta", "must be in [0, 1]"));
        }
        if self.delta == 0 {
            return Err(Error::config("imitation.delta", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.alpha1) {
            return Err(Error::config("imitation.alpha1", "must be in [0, 1]"));
        }
        if !(self.alpha2 >= 1.0 && self.alpha2.is_finite()) {
            return Err(Error::config("imitation.alpha2", "must be >= 1"));
        }
        if !self.beta1.is_finite() || !self.beta2.is_finite() {
            return Err(Error::config("imitation.beta1", "weights must be finite"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        TrainerConfig::default().validate().unwrap();
        ImitationConfig::default().validate().unwrap();
    }

    #[test]
    fn gamma_out_of_range_names_field() {
        let cfg = TrainerConfig {
            gamma: 1.5,
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "trainer.gamma"));
    }

    #[test]
    fn epsilon_schedule_is_exact_power() {
        let cfg = TrainerConfig::default();
        for k in 0..2000 {
            assert_eq!(cfg.epsilon_after(k), 0.995f64.powi(k as i32).max(0.01));
        }
        assert_eq!(cfg.epsilon_after(0), 1.0);
        assert_eq!(cfg.epsilon_after(10_000), 0.01);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert!("ppo".parse::<Algorithm>().is_err());
    }
}
