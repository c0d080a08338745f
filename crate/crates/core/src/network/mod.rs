//! Attention CNN that predicts per-pixel fusion weights from low-res luma.
//!
//! Layout: a shared 3x3 stem, channel then frame attention across the whole
//! stack, a per-frame dilated inception block with spatial attention, a 3x3
//! head and a softmax over frames. Gradients are computed by hand in
//! `backward.rs`.

mod backward;
mod checkpoint;
mod conv;
mod forward;
mod params;
mod tensor;

pub use backward::network_backward;
pub use checkpoint::{
    read_checkpoint, read_checkpoint_from, write_checkpoint, write_checkpoint_to, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use conv::conv2d;
pub use forward::{
    cfca_forward, disa_forward, forward_trace, network_forward, BranchTrace, CfcaTrace, DisaTrace, ForwardTrace,
};
pub use params::{
    Conv2d, DisaBranch, GradientSet, Linear, NetworkHyper, NetworkParams, TensorRef, DEFAULT_CHANNELS, DEFAULT_RATES,
    SPATIAL_ATTENTION_KERNEL,
};
pub use tensor::Tensor4;
