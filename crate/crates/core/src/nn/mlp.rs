use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};

/// One affine layer. `weights` is `fan_in × fan_out` so a batch `X` maps to
/// `X·W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weights: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }

    fn fan_in(&self) -> usize {
        self.weights.nrows()
    }

    fn fan_out(&self) -> usize {
        self.weights.ncols()
    }
}

/// Fully connected network: rectified-linear hidden layers, identity output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Gradients with the same layout as the network they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub layers: Vec<Dense>,
}

impl Grads {
    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.weights.iter().chain(l.bias.iter()).map(|g| g * g).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.weights *= k;
            l.bias *= k;
        }
    }
}

fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err(Error::contract(format!(
            "network needs at least two non-zero layer widths, got {widths:?}"
        )));
    }
    Ok(())
}

impl Mlp {
    /// Weights and biases drawn uniformly from `±√(1/fan_in)`.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], rng: &mut R) -> Result<Self> {
        check_widths(widths)?;
        let layers = widths
            .windows(2)
            .map(|w| {
                let bound = (1.0 / w[0] as f64).sqrt();
                let mut layer = Dense::zeros(w[0], w[1]);
                layer.weights.mapv_inplace(|_| rng.gen_range(-bound..=bound));
                layer.bias.mapv_inplace(|_| rng.gen_range(-bound..=bound));
                layer
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn zeros(widths: &[usize]) -> Result<Self> {
        check_widths(widths)?;
        Ok(Self {
            layers: widths.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::contract("network needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.fan_out() || l.fan_in() == 0 || l.fan_out() == 0 {
                return Err(Error::contract(format!("layer {i} has inconsistent shapes")));
            }
            if i > 0 && layers[i - 1].fan_out() != l.fan_in() {
                return Err(Error::contract(format!("layer {i} input does not match layer {}", i - 1)));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].fan_in())
            .chain(self.layers.iter().map(Dense::fan_out))
            .collect()
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_len(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters in checkpoint order: per layer, weights row-major then bias.
    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(f64::is_finite)
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.widths() == other.widths()
    }

    /// Q-values for a single state.
    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.input_len() {
            return Err(Error::contract(format!(
                "state has {} entries, network expects {}",
                state.len(),
                self.input_len()
            )));
        }
        let mut h: Array1<f64> = ArrayView1::from(state).to_owned();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            h = h.dot(&l.weights) + &l.bias;
            if i < last {
                h.mapv_inplace(relu);
            }
        }
        Ok(h.to_vec())
    }

    /// Q-values for a batch of states, one row per state.
    pub fn forward_batch(&self, states: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_batch(states)?;
        let mut h = states.to_owned();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            h = h.dot(&l.weights) + &l.bias;
            if i < last {
                h.mapv_inplace(relu);
            }
        }
        Ok(h)
    }

    fn check_batch(&self, states: ArrayView2<f64>) -> Result<()> {
        if states.ncols() != self.input_len() {
            return Err(Error::contract(format!(
                "batch rows have {} entries, network expects {}",
                states.ncols(),
                self.input_len()
            )));
        }
        Ok(())
    }

    /// Mean squared TD error `(1/B)·Σ(y_k − Q(s_k, a_k))²` and its gradient
    /// with respect to every parameter. Only the taken action's output
    /// contributes for each sample.
    pub fn loss_and_grads(
        &self,
        states: ArrayView2<f64>,
        actions: &[usize],
        targets: &[f64],
    ) -> Result<(f64, Grads)> {
        self.check_batch(states)?;
        let batch = states.nrows();
        if batch == 0 || actions.len() != batch || targets.len() != batch {
            return Err(Error::contract(format!(
                "batch of {batch} states with {} actions and {} targets",
                actions.len(),
                targets.len()
            )));
        }
        if let Some(a) = actions.iter().find(|&&a| a >= self.output_len()) {
            return Err(Error::contract(format!("action {a} out of range")));
        }
        if let Some(y) = targets.iter().find(|y| !y.is_finite()) {
            return Err(Error::Divergence(format!("non-finite TD target {y}")));
        }

        // keep every layer's input for the backward pass
        let last = self.layers.len() - 1;
        let mut inputs: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        let mut h = states.to_owned();
        for (i, l) in self.layers.iter().enumerate() {
            let z = h.dot(&l.weights) + &l.bias;
            inputs.push(h);
            h = if i < last { z.mapv(relu) } else { z };
        }
        let q = h;

        let scale = 2.0 / batch as f64;
        let mut loss = 0.0;
        let mut delta = Array2::<f64>::zeros(q.raw_dim());
        for k in 0..batch {
            let err = targets[k] - q[[k, actions[k]]];
            loss += err * err;
            delta[[k, actions[k]]] = -scale * err;
        }
        loss /= batch as f64;

        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let input = &inputs[i];
            let weights = input.t().dot(&delta);
            let bias = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut back = delta.dot(&self.layers[i].weights.t());
                // the input of layer i is relu(z) of layer i-1; relu' is 1 where it is positive
                Zip::from(&mut back).and(input).for_each(|d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = back;
            }
            grads.push(Dense { weights, bias });
        }
        grads.reverse();
        Ok((loss, Grads { layers: grads }))
    }

    /// `self ← tau·src + (1 − tau)·self`, entry by entry.
    pub fn soft_update_from(&mut self, src: &Mlp, tau: f64) -> Result<()> {
        if !self.same_shape(src) {
            return Err(Error::contract(format!(
                "soft update between shapes {:?} and {:?}",
                self.widths(),
                src.widths()
            )));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::contract(format!("soft update weight {tau} outside [0, 1]")));
        }
        if tau == 1.0 {
            self.layers.clone_from(&src.layers);
            return Ok(());
        }
        if tau == 0.0 {
            return Ok(());
        }
        let keep = 1.0 - tau;
        for (d, s) in self.layers.iter_mut().zip(&src.layers) {
            Zip::from(&mut d.weights)
                .and(&s.weights)
                .for_each(|d, &s| *d = tau * s + keep * *d);
            Zip::from(&mut d.bias)
                .and(&s.bias)
                .for_each(|d, &s| *d = tau * s + keep * *d);
        }
        Ok(())
    }

    /// Cheap order-sensitive fingerprint of every parameter bit pattern.
    pub fn fingerprint(&self) -> u64 {
        self.params().fold(0xCBF2_9CE4_8422_2325u64, |h, x| {
            (h ^ x.to_bits()).wrapping_mul(0x0100_0000_01B3)
        })
    }
}

fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Free-function form of [`Mlp::soft_update_from`].
pub fn soft_update(dst: &mut Mlp, src: &Mlp, tau: f64) -> Result<()> {
    dst.soft_update_from(src, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[5, 16, 16, 8]).unwrap();
        let q = net.forward(&[0.3, -0.2, 1.0, 0.0, 0.5]).unwrap();
        assert_eq!(q, vec![0.0; 8]);
    }

    #[test]
    fn shape_mismatch_is_a_contract_violation() {
        let net = Mlp::zeros(&[3, 4, 8]).unwrap();
        assert!(matches!(net.forward(&[1.0, 2.0]), Err(Error::Contract(_))));
        let other = Mlp::zeros(&[3, 5, 8]).unwrap();
        let mut dst = net.clone();
        assert!(dst.soft_update_from(&other, 0.5).is_err());
        assert!(Mlp::zeros(&[3]).is_err());
    }

    #[test]
    fn batch_and_single_forward_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::new(&[3, 6, 6, 8], &mut rng).unwrap();
        let states = array![[0.1, 0.2, -0.3], [1.0, -1.0, 0.5]];
        let q = net.forward_batch(states.view()).unwrap();
        for k in 0..2 {
            let single = net.forward(states.row(k).as_slice().unwrap()).unwrap();
            for a in 0..8 {
                assert!((single[a] - q[[k, a]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perfect_targets_give_zero_loss_and_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::new(&[4, 8, 8], &mut rng).unwrap();
        let states = array![[0.1, 0.2, -0.3, 0.4], [0.0, 1.0, 0.5, -0.5]];
        let q = net.forward_batch(states.view()).unwrap();
        let actions = [3, 5];
        let targets = [q[[0, 3]], q[[1, 5]]];
        let (loss, grads) = net.loss_and_grads(states.view(), &actions, &targets).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grads.norm(), 0.0);
    }

    #[test]
    fn non_finite_target_is_divergence() {
        let net = Mlp::zeros(&[2, 3, 8]).unwrap();
        let states = array![[0.0, 1.0]];
        let err = net.loss_and_grads(states.view(), &[0], &[f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }

    #[test]
    fn soft_update_extremes_and_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let src = Mlp::new(&[3, 4, 8], &mut rng).unwrap();
        let mut dst = Mlp::new(&[3, 4, 8], &mut rng).unwrap();
        let orig = dst.clone();
        dst.soft_update_from(&src, 0.0).unwrap();
        assert_eq!(dst, orig);
        dst.soft_update_from(&src, 1.0).unwrap();
        assert_eq!(dst, src);

        let mut zeros = Mlp::zeros(&[3, 4, 8]).unwrap();
        let mut ones = Mlp::zeros(&[3, 4, 8]).unwrap();
        for l in ones.layers_mut() {
            l.weights.fill(1.0);
            l.bias.fill(1.0);
        }
        soft_update(&mut zeros, &ones, 0.01).unwrap();
        assert!(zeros.params().all(|x| x == 0.01));
        assert!(dst.soft_update_from(&src, 1.5).is_err());
    }
}
