//! Seeded workload generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crosswalk_core::nn::Tensor4;
use crosswalk_core::{CrosswalkClass, Detection, OrientedBox, RasterImage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Crosswalk-shaped boxes scattered over a `span` x `span` area.
pub fn random_boxes(n: usize, span: f64, rng: &mut ChaCha8Rng) -> Vec<OrientedBox> {
    (0..n)
        .map(|_| {
            OrientedBox::new(
                rng.gen_range(0.0..span),
                rng.gen_range(0.0..span),
                rng.gen_range(20.0..90.0),
                rng.gen_range(6.0..24.0),
                rng.gen_range(-1.57..1.57),
            )
            .unwrap()
        })
        .collect()
}

/// Detections clustered in groups of `per_cluster` near-duplicates, as a
/// detector produces around each object.
pub fn clustered_detections(clusters: usize, per_cluster: usize, rng: &mut ChaCha8Rng) -> Vec<Detection> {
    let centres = random_boxes(clusters, 4000.0, rng);
    let mut out = Vec::with_capacity(clusters * per_cluster);
    for c in &centres {
        for _ in 0..per_cluster {
            let b = OrientedBox::new(
                c.cx() + rng.gen_range(-3.0..3.0),
                c.cy() + rng.gen_range(-3.0..3.0),
                c.w() * rng.gen_range(0.9..1.1),
                c.h() * rng.gen_range(0.9..1.1),
                c.theta() + rng.gen_range(-0.05..0.05),
            )
            .unwrap();
            let class = CrosswalkClass::ALL[rng.gen_range(0..2)];
            out.push(Detection::new(b, class, rng.gen_range(0.2..1.0)).unwrap());
        }
    }
    out
}

pub fn random_tensor(shape: [usize; 4], rng: &mut ChaCha8Rng) -> Tensor4 {
    Tensor4::from_fn(shape, |_, _, _, _| rng.gen_range(-2.0..2.0))
}

pub fn blank_raster(width: usize, height: usize, channels: usize) -> RasterImage {
    RasterImage::filled(width, height, channels, 80).unwrap()
}
