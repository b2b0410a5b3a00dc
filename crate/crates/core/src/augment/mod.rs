//! Seeded training-time augmentations applied jointly to an image and its labels.

mod hsv;
mod mosaic;
mod rotate;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::GroundTruthBox;
use crate::imagery::RasterImage;

pub use hsv::{hsv_adjust, hsv_jitter, HsvFactors, HsvGains};
pub use mosaic::{mosaic, mosaic_at};
pub use rotate::{random_rotation, rotate_sample, MAX_ROTATION};

/// Grey level used wherever an augmentation exposes pixels with no source.
pub const FILL_VALUE: u8 = 114;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: RasterImage,
    pub labels: Vec<GroundTruthBox>,
}

impl Sample {
    pub fn new(image: RasterImage, labels: Vec<GroundTruthBox>) -> Self {
        Self { image, labels }
    }
}

/// Deterministic random source for augmentations.
#[derive(Debug, Clone)]
pub struct AugmentRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl AugmentRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream `index` of `seed`. Streams depend only on
    /// `(seed, index)`, so workers can each take one without coordination.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index.wrapping_add(1));
        Self { seed, inner }
    }

    /// Child generator seeded from this one's next output.
    pub fn split(&mut self) -> Self {
        Self::new(self.inner.next_u64())
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            return lo;
        }
        self.inner.gen_range(lo..hi)
    }

    /// Uniform integer in `[lo, hi)`; `lo` when the range is empty.
    pub fn uniform_usize(&mut self, lo: usize, hi: usize) -> usize {
        if lo >= hi {
            return lo;
        }
        self.inner.gen_range(lo..hi)
    }
}
