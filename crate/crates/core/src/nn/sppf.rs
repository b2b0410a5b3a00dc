use super::ops::{concat_channels, conv2d, max_pool2d, soft_pool2d};
use super::tensor::Tensor4;
use super::weights::{SppfBranch, SppfWeights};
use crate::error::Result;

/// Kernel of each of the three serial pools (effective receptive fields 5, 9, 13).
pub const SPPF_POOL_KERNEL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    Max,
    Soft,
}

/// `post(concat(z, p(z), p(p(z)), p(p(p(z)))))` with `z = pre(x)`.
pub fn pooling_branch(x: &Tensor4, branch: &SppfBranch, kind: PoolKind) -> Result<Tensor4> {
    let pool = |t: &Tensor4| match kind {
        PoolKind::Max => max_pool2d(t, SPPF_POOL_KERNEL),
        PoolKind::Soft => soft_pool2d(t, SPPF_POOL_KERNEL),
    };
    let z = conv2d(x, &branch.pre_conv)?;
    let p1 = pool(&z)?;
    let p2 = pool(&p1)?;
    let p3 = pool(&p2)?;
    conv2d(&concat_channels(&[&z, &p1, &p2, &p3])?, &branch.post_conv)
}

/// Dual-branch SPPF: max-pool and soft-pool pyramids side by side, each
/// producing `C/2` channels, concatenated back to `C` (max branch first).
pub fn dual_branch_sppf(x: &Tensor4, weights: &SppfWeights) -> Result<Tensor4> {
    weights.validate(x.c())?;
    let max_branch = pooling_branch(x, &weights.max_branch, PoolKind::Max)?;
    let soft_branch = pooling_branch(x, &weights.soft_branch, PoolKind::Soft)?;
    concat_channels(&[&max_branch, &soft_branch])
}
