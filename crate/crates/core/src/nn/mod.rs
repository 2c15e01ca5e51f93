//! Minimal dense-network stack: sine/relu/tanh MLPs with exact
//! reverse-mode gradients, Adam, stochastic weight averaging and
//! versioned checkpoints. No external ML framework.

mod adam;
mod checkpoint;
mod init;
mod net;
mod swa;

pub use adam::AdamState;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use init::{mlp_init, siren_init};
pub use net::{Activation, DenseNet, ForwardCache, Gradients, Layer};
pub use swa::SwaState;
