use ndarray::Zip;
use serde::{Deserialize, Serialize};

use super::mlp::{Dense, Grads, Mlp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Rescale gradients whose global L2 norm exceeds this. Off when `None`.
    pub max_grad_norm: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_grad_norm: None,
        }
    }
}

/// Adaptive-moment optimizer state for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    config: AdamConfig,
    step: i32,
    m: Vec<Dense>,
    v: Vec<Dense>,
}

impl Adam {
    pub fn new(net: &Mlp, config: AdamConfig) -> Self {
        let zeros = Mlp::zeros(&net.widths()).expect("widths of an existing network are valid");
        Self {
            config,
            step: 0,
            m: zeros.layers().to_vec(),
            v: zeros.layers().to_vec(),
        }
    }

    pub fn steps(&self) -> i32 {
        self.step
    }

    pub fn apply(&mut self, net: &mut Mlp, mut grads: Grads) -> Result<()> {
        if grads.layers.len() != self.m.len() || net.layers().len() != self.m.len() {
            return Err(Error::contract("optimizer, network and gradient layouts differ"));
        }
        if let Some(max) = self.config.max_grad_norm {
            let norm = grads.norm();
            if norm > max {
                grads.scale(max / norm);
            }
        }
        self.step += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
            ..
        } = self.config;
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        for ((p, g), (m, v)) in net
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let update = |p: &mut f64, &g: &f64, m: &mut f64, v: &mut f64| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            };
            Zip::from(&mut p.weights)
                .and(&g.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .for_each(update);
            Zip::from(&mut p.bias)
                .and(&g.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .for_each(update);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = Mlp::new(&[3, 4, 8], &mut rng).unwrap();
        let before = net.clone();
        let mut opt = Adam::new(&net, AdamConfig::default());
        let zeros = Grads {
            layers: Mlp::zeros(&[3, 4, 8]).unwrap().layers().to_vec(),
        };
        opt.apply(&mut net, zeros).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn first_step_moves_each_parameter_by_about_lr() {
        let mut net = Mlp::zeros(&[2, 8]).unwrap();
        let mut g = Mlp::zeros(&[2, 8]).unwrap();
        for l in g.layers_mut() {
            l.weights.fill(3.0);
            l.bias.fill(-0.5);
        }
        let mut opt = Adam::new(&net, AdamConfig { learning_rate: 0.01, ..Default::default() });
        opt.apply(&mut net, Grads { layers: g.layers().to_vec() }).unwrap();
        let l = &net.layers()[0];
        assert!(l.weights.iter().all(|&w| (w + 0.01).abs() < 1e-8));
        assert!(l.bias.iter().all(|&b| (b - 0.01).abs() < 1e-8));
    }

    #[test]
    fn clipping_bounds_the_gradient_norm() {
        let mut g = Grads {
            layers: Mlp::zeros(&[2, 8]).unwrap().layers().to_vec(),
        };
        g.layers[0].weights.fill(10.0);
        let norm = g.norm();
        g.scale(1.0 / norm);
        assert!((g.norm() - 1.0).abs() < 1e-12);
    }
}
