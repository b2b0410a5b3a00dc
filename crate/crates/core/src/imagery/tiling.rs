use std::fmt;

use super::RasterImage;
use crate::error::{Error, Result};

/// Square patch size and the overlap shared by neighbouring patches, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileSpec {
    patch: usize,
    overlap: usize,
}

impl TileSpec {
    pub const DEFAULT_PATCH: usize = 1024;
    pub const DEFAULT_OVERLAP: usize = 256;

    pub fn new(patch: usize, overlap: usize) -> Result<Self> {
        if patch == 0 {
            return Err(Error::Validation("patch size must be positive".into()));
        }
        if overlap >= patch {
            return Err(Error::Validation(format!(
                "overlap ({overlap}) must be smaller than patch ({patch})"
            )));
        }
        Ok(Self { patch, overlap })
    }

    pub fn patch(&self) -> usize {
        self.patch
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn stride(&self) -> usize {
        self.patch - self.overlap
    }
}

impl Default for TileSpec {
    fn default() -> Self {
        Self {
            patch: Self::DEFAULT_PATCH,
            overlap: Self::DEFAULT_OVERLAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileWindow {
    pub origin_col: usize,
    pub origin_row: usize,
    pub width: usize,
    pub height: usize,
    pub tile_index: usize,
}

impl TileWindow {
    /// Whether the continuous point `(x, y)` lies in `[origin, origin + size)` on both axes.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        let (x0, y0) = (self.origin_col as f64, self.origin_row as f64);
        x >= x0 && x < x0 + self.width as f64 && y >= y0 && y < y0 + self.height as f64
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.origin_col + self.width <= width && self.origin_row + self.height <= height
    }
}

impl fmt::Display for TileWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#{} {}x{}+{}+{}",
            self.tile_index, self.width, self.height, self.origin_col, self.origin_row
        )
    }
}

/// Window origins along one axis: multiples of the stride, with the last
/// window pulled back so it ends exactly on the image edge.
fn axis_origins(extent: usize, spec: TileSpec) -> Vec<(usize, usize)> {
    if extent <= spec.patch {
        return vec![(0, extent)];
    }
    let mut origins = Vec::with_capacity(extent / spec.stride() + 2);
    let mut origin = 0;
    loop {
        if origin + spec.patch >= extent {
            origins.push((extent - spec.patch, spec.patch));
            break;
        }
        origins.push((origin, spec.patch));
        origin += spec.stride();
    }
    origins
}

/// Row-major overlapping tile plan covering every pixel of a `width`x`height` image.
pub fn plan_tiles(width: usize, height: usize, spec: TileSpec) -> Vec<TileWindow> {
    let cols = axis_origins(width, spec);
    let rows = axis_origins(height, spec);
    let mut windows = Vec::with_capacity(cols.len() * rows.len());
    for &(origin_row, h) in &rows {
        for &(origin_col, w) in &cols {
            windows.push(TileWindow {
                origin_col,
                origin_row,
                width: w,
                height: h,
                tile_index: windows.len(),
            });
        }
    }
    windows
}

/// Copies the pixels under `window` into a new image.
pub fn extract_tile(image: &RasterImage, window: &TileWindow) -> Result<RasterImage> {
    if window.width == 0 || window.height == 0 || !window.fits_in(image.width(), image.height()) {
        return Err(Error::Bounds {
            window: window.to_string(),
            width: image.width(),
            height: image.height(),
        });
    }
    let ch = image.channels();
    let row_len = window.width * ch;
    let mut samples = Vec::with_capacity(row_len * window.height);
    for r in 0..window.height {
        let start = image.index(window.origin_row + r, window.origin_col);
        samples.extend_from_slice(&image.samples()[start..start + row_len]);
    }
    RasterImage::new(window.width, window.height, ch, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Smallest window count n with (n - 1) * stride + patch >= extent.
    fn count_oracle(extent: usize, patch: usize, overlap: usize) -> usize {
        if extent <= patch {
            return 1;
        }
        let stride = patch - overlap;
        let mut n = 1;
        while (n - 1) * stride + patch < extent {
            n += 1;
        }
        n
    }

    #[test]
    fn ten_thousand_square_default_plan() {
        let windows = plan_tiles(10_000, 10_000, TileSpec::default());
        let per_axis = count_oracle(10_000, 1024, 256);
        assert_eq!(per_axis, 13);
        assert_eq!(windows.len(), per_axis * per_axis);
        assert_eq!(windows.len(), 169);
        let last = windows.last().unwrap();
        assert_eq!((last.origin_col, last.origin_row), (8976, 8976));
        assert!(windows.iter().all(|w| w.width == 1024 && w.height == 1024));
        assert!(windows.iter().enumerate().all(|(i, w)| w.tile_index == i));
    }

    #[test]
    fn small_and_exact_images() {
        let w = plan_tiles(800, 600, TileSpec::default());
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].origin_col, w[0].origin_row, w[0].width, w[0].height), (0, 0, 800, 600));

        let w = plan_tiles(1024, 1024, TileSpec::default());
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].width, w[0].height), (1024, 1024));
    }

    #[test]
    fn row_major_order() {
        let w = plan_tiles(2000, 1100, TileSpec::new(1024, 256).unwrap());
        let origins: Vec<_> = w.iter().map(|t| (t.origin_row, t.origin_col)).collect();
        assert_eq!(
            origins,
            vec![(0, 0), (0, 768), (0, 976), (76, 0), (76, 768), (76, 976)]
        );
    }

    #[test]
    fn tile_spec_validation() {
        assert!(TileSpec::new(256, 256).is_err());
        assert!(TileSpec::new(0, 0).is_err());
        assert_eq!(TileSpec::new(16, 15).unwrap().stride(), 1);
    }

    fn ramp(width: usize, height: usize) -> RasterImage {
        let samples = (0..width * height).map(|v| v as u8).collect();
        RasterImage::new(width, height, 1, samples).unwrap()
    }

    #[test]
    fn extract_interior_window() {
        let img = ramp(4, 4);
        let win = TileWindow { origin_col: 1, origin_row: 1, width: 2, height: 2, tile_index: 0 };
        let tile = extract_tile(&img, &win).unwrap();
        assert_eq!(tile.samples(), &[5, 6, 9, 10]);
    }

    #[test]
    fn extract_full_and_border_windows() {
        let img = ramp(4, 4);
        let full = TileWindow { origin_col: 0, origin_row: 0, width: 4, height: 4, tile_index: 0 };
        assert_eq!(extract_tile(&img, &full).unwrap(), img);

        let corner = TileWindow { origin_col: 3, origin_row: 2, width: 1, height: 2, tile_index: 0 };
        assert_eq!(extract_tile(&img, &corner).unwrap().samples(), &[11, 15]);

        let outside = TileWindow { origin_col: 3, origin_row: 3, width: 2, height: 1, tile_index: 0 };
        assert!(matches!(extract_tile(&img, &outside), Err(Error::Bounds { .. })));
    }

    #[test]
    fn extract_keeps_channels() {
        let img = RasterImage::new(3, 2, 3, (0..18).collect()).unwrap();
        let win = TileWindow { origin_col: 2, origin_row: 1, width: 1, height: 1, tile_index: 0 };
        assert_eq!(extract_tile(&img, &win).unwrap().samples(), &[15, 16, 17]);
    }

    proptest! {
        #[test]
        fn windows_cover_every_pixel(
            width in 1usize..64, height in 1usize..64, patch in 1usize..24, overlap_frac in 0.0f64..1.0
        ) {
            let overlap = ((patch as f64) * overlap_frac) as usize % patch;
            let spec = TileSpec::new(patch, overlap).unwrap();
            let windows = plan_tiles(width, height, spec);
            let mut covered = vec![false; width * height];
            for w in &windows {
                prop_assert!(w.fits_in(width, height));
                if width >= patch { prop_assert_eq!(w.width, patch); }
                if height >= patch { prop_assert_eq!(w.height, patch); }
                for r in w.origin_row..w.origin_row + w.height {
                    for c in w.origin_col..w.origin_col + w.width {
                        covered[r * width + c] = true;
                    }
                }
            }
            prop_assert!(covered.iter().all(|&c| c));
            prop_assert_eq!(windows.len(), count_oracle(width, patch, overlap) * count_oracle(height, patch, overlap));
        }

        #[test]
        fn neighbours_share_at_least_overlap(width in 1usize..5000, patch in 1usize..600, overlap_frac in 0.0f64..1.0) {
            let overlap = ((patch as f64) * overlap_frac) as usize % patch;
            let spec = TileSpec::new(patch, overlap).unwrap();
            let origins = axis_origins(width, spec);
            for pair in origins.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                prop_assert!(b.0 > a.0);
                prop_assert!(a.0 + a.1 >= b.0 + overlap);
            }
        }
    }
}
