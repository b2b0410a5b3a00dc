use super::ops::{
    channel_max, channel_softpool, concat_channels, conv2d, global_max_pool, global_soft_pool, relu,
    sigmoid,
};
use super::tensor::Tensor4;
use super::weights::SoftCbamWeights;
use crate::error::Result;

fn channel_mlp(pooled: &Tensor4, w: &SoftCbamWeights) -> Result<Tensor4> {
    conv2d(&conv2d(pooled, &w.mlp_reduce)?.map(relu), &w.mlp_expand)
}

/// Channel gate `sigmoid(MLP(softpool(x)) + MLP(maxpool(x)))`, shape `(n, c, 1, 1)`.
pub fn channel_attention(x: &Tensor4, w: &SoftCbamWeights) -> Result<Tensor4> {
    w.validate(x.c())?;
    let soft = channel_mlp(&global_soft_pool(x), w)?;
    let max = channel_mlp(&global_max_pool(x), w)?;
    let logits: Vec<f64> = soft.data().iter().zip(max.data()).map(|(a, b)| sigmoid(a + b)).collect();
    Tensor4::new(soft.shape(), logits)
}

/// Spatial gate `sigmoid(conv7x7([softpool_c(x); max_c(x)]))`, shape `(n, 1, h, w)`.
pub fn spatial_attention(x: &Tensor4, w: &SoftCbamWeights) -> Result<Tensor4> {
    w.validate(x.c())?;
    let stacked = concat_channels(&[&channel_softpool(x), &channel_max(x)])?;
    Ok(conv2d(&stacked, &w.spatial_conv)?.map(sigmoid))
}

/// Channel gating followed by spatial gating of the channel-refined map.
pub fn soft_cbam(x: &Tensor4, w: &SoftCbamWeights) -> Result<Tensor4> {
    let refined = x.mul_broadcast(&channel_attention(x, w)?)?;
    refined.mul_broadcast(&spatial_attention(&refined, w)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{soft_pool_weighted, CBAM_REDUCTION};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(shape: [usize; 4], rng: &mut ChaCha8Rng) -> Tensor4 {
        Tensor4::from_fn(shape, |_, _, _, _| rng.gen_range(-3.0..3.0))
    }

    #[test]
    fn zero_weights_give_half_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random([2, 32, 5, 6], &mut rng);
        let w = SoftCbamWeights::zeros(32, CBAM_REDUCTION);
        let ca = channel_attention(&x, &w).unwrap();
        assert_eq!(ca.shape(), [2, 32, 1, 1]);
        assert!(ca.data().iter().all(|&v| v == 0.5));
        let sa = spatial_attention(&x, &w).unwrap();
        assert_eq!(sa.shape(), [2, 1, 5, 6]);
        assert!(sa.data().iter().all(|&v| v == 0.5));
        let out = soft_cbam(&x, &w).unwrap();
        assert!(out.max_abs_diff(&x.map(|v| v * 0.25)) < 1e-15);
    }

    #[test]
    fn channel_attention_matches_hand_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random([1, 16, 4, 5], &mut rng);
        let w = SoftCbamWeights::seeded(16, 4, &mut rng);
        let got = channel_attention(&x, &w).unwrap();
        let hidden = w.mlp_reduce.out_channels();
        for c in 0..16 {
            let soft: Vec<f64> = (0..16).map(|k| soft_pool_weighted(x.plane(0, k).iter().copied())).collect();
            let maxv: Vec<f64> = (0..16).map(|k| x.plane(0, k).iter().copied().fold(f64::MIN, f64::max)).collect();
            let mlp = |v: &[f64]| {
                let h: Vec<f64> = (0..hidden)
                    .map(|j| (w.mlp_reduce.bias()[j] + (0..16).map(|k| w.mlp_reduce.weight(j, k, 0, 0) * v[k]).sum::<f64>()).max(0.0))
                    .collect();
                w.mlp_expand.bias()[c] + (0..hidden).map(|j| w.mlp_expand.weight(c, j, 0, 0) * h[j]).sum::<f64>()
            };
            let expected = 1.0 / (1.0 + (-(mlp(&soft) + mlp(&maxv))).exp());
            assert!((got.get(0, c, 0, 0) - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn spatial_attention_matches_hand_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random([1, 5, 6, 6], &mut rng);
        let w = SoftCbamWeights::seeded(5, 16, &mut rng);
        let got = spatial_attention(&x, &w).unwrap();
        let pooled = |y: usize, xx: usize| {
            let vals: Vec<f64> = (0..5).map(|c| x.get(0, c, y, xx)).collect();
            [soft_pool_weighted(vals.iter().copied()), vals.iter().copied().fold(f64::MIN, f64::max)]
        };
        for y in 0..6 {
            for xx in 0..6 {
                let mut s = w.spatial_conv.bias()[0];
                for ky in 0..7 {
                    for kx in 0..7 {
                        let (iy, ix) = (y as isize + ky as isize - 3, xx as isize + kx as isize - 3);
                        if (0..6).contains(&iy) && (0..6).contains(&ix) {
                            let p = pooled(iy as usize, ix as usize);
                            s += w.spatial_conv.weight(0, 0, ky, kx) * p[0] + w.spatial_conv.weight(0, 1, ky, kx) * p[1];
                        }
                    }
                }
                let expected = 1.0 / (1.0 + (-s).exp());
                assert!((got.get(0, 0, y, xx) - expected).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn soft_cbam_composition_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let x = random([1, 32, 6, 6], &mut rng);
            let w = SoftCbamWeights::seeded(32, CBAM_REDUCTION, &mut rng);
            let out = soft_cbam(&x, &w).unwrap();
            let ca = channel_attention(&x, &w).unwrap();
            assert!(ca.data().iter().all(|&g| g > 0.0 && g < 1.0));
            let x1 = Tensor4::from_fn(x.shape(), |n, c, y, xx| x.get(n, c, y, xx) * ca.get(n, c, 0, 0));
            let sa = spatial_attention(&x1, &w).unwrap();
            assert!(sa.data().iter().all(|&g| g > 0.0 && g < 1.0));
            let manual = Tensor4::from_fn(x.shape(), |n, c, y, xx| x1.get(n, c, y, xx) * sa.get(n, 0, y, xx));
            assert!(out.max_abs_diff(&manual) < 1e-6);
            assert!(out.data().iter().zip(x.data()).all(|(o, i)| o.abs() <= i.abs()));
        }
        let zero = Tensor4::zeros([1, 32, 3, 3]);
        let w = SoftCbamWeights::seeded(32, CBAM_REDUCTION, &mut rng);
        assert!(soft_cbam(&zero, &w).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch_is_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = SoftCbamWeights::seeded(32, CBAM_REDUCTION, &mut rng);
        assert!(soft_cbam(&Tensor4::zeros([1, 16, 3, 3]), &w).is_err());
    }
}
