//! Dense Q-network: forward pass with inverted dropout, backpropagation of a
//! masked MSE loss, Adam, exact target copies, and a binary checkpoint format.

mod adam;
mod checkpoint;
mod network;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use network::{mse_loss_and_grad, sync_target, Dense, ForwardCache, NetworkConfig, QNetwork};
pub use tensor::Tensor;
