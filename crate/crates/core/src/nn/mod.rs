//! Dense Q-network, its optimizer, replay memory and checkpoint format.

mod adam;
pub mod checkpoint;
mod mlp;
mod replay;

pub use adam::{Adam, AdamConfig};
pub use mlp::{soft_update, Dense, Grads, Mlp};
pub use replay::{ReplayBuffer, Transition};

use ndarray::ArrayView2;

use crate::error::Result;

/// One optimizer step on the squared TD error of `(states, actions, targets)`.
/// Returns the loss measured before the update.
pub fn train_step(
    net: &mut Mlp,
    opt: &mut Adam,
    states: ArrayView2<f64>,
    actions: &[usize],
    targets: &[f64],
) -> Result<f64> {
    let (loss, grads) = net.loss_and_grads(states, actions, targets)?;
    opt.apply(net, grads)?;
    Ok(loss)
}
