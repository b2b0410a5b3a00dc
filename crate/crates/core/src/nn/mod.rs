//! Forward-only reference implementations of the pooling and attention
//! blocks (dual-branch SPPF, Soft-CBAM) and the cosine learning-rate schedule.
//!
//! Everything runs on small dense `f64` tensors, single-threaded and
//! deterministic. There is no autograd; weights come from a seeded generator
//! or a weight file.

mod attention;
mod ops;
mod schedule;
mod sppf;
mod tensor;
mod weights;

pub use attention::{channel_attention, soft_cbam, spatial_attention};
pub use ops::{
    channel_max, channel_softpool, concat_channels, conv2d, conv2d_strided, global_max_pool,
    global_soft_pool, max_pool2d, relu, sigmoid, soft_pool2d, soft_pool_naive, soft_pool_weighted,
};
pub use schedule::cosine_lr;
pub use sppf::{dual_branch_sppf, pooling_branch, PoolKind, SPPF_POOL_KERNEL};
pub use tensor::Tensor4;
pub use weights::{
    read_weight_file, read_weights, write_weight_file, write_weights, ConvWeights, ModuleWeights, SoftCbamWeights, SppfBranch,
    SppfWeights, WeightTensor, CBAM_REDUCTION,
};
