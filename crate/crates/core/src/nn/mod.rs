//! Network primitives: linear layers, batch and RMS normalization, inverted
//! residual blocks, the composed actor/critic network with its reverse pass,
//! the Adam optimizer and the checkpoint container.

pub mod block;
pub mod checkpoint;
pub mod linear;
pub mod network;
pub mod norm;
pub mod optim;

pub use block::{BlockCache, BlockParams};
pub use linear::LinearParams;
pub use network::{
    ForwardOutput, Gradients, NetworkConfig, NetworkGrads, NetworkParams, Tape, TensorRef,
    TensorMut, TensorRole,
};
pub use norm::{
    rmsnorm_backward, rmsnorm_forward, rmsnorm_forward_cached, BatchNormCache, BatchNormParams, BatchStats, NormParams,
    RmsNormCache,
};
pub use optim::{Adam, AdamConfig};

/// Whether batch norm uses batch statistics (`Train`) or running statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Convenience wrapper over [`NetworkParams::init`].
pub fn init_params<T: crate::Scalar>(config: &NetworkConfig, seed: u64) -> crate::Result<NetworkParams<T>> {
    NetworkParams::init(config, seed)
}
