use super::detection::Detection;
use crate::error::Result;
use crate::imagery::{RasterImage, TileWindow};

/// A per-tile object detector.
///
/// Implementations return boxes in tile-local pixel coordinates. They are
/// called concurrently from worker threads, so they must be stateless or
/// synchronise internally.
pub trait DetectorBackend: Send + Sync {
    fn detect(&self, tile: &RasterImage, window: &TileWindow) -> Result<Vec<Detection>>;
}

impl<T: DetectorBackend + ?Sized> DetectorBackend for &T {
    fn detect(&self, tile: &RasterImage, window: &TileWindow) -> Result<Vec<Detection>> {
        (**self).detect(tile, window)
    }
}

impl<T: DetectorBackend + ?Sized> DetectorBackend for Box<T> {
    fn detect(&self, tile: &RasterImage, window: &TileWindow) -> Result<Vec<Detection>> {
        (**self).detect(tile, window)
    }
}

/// Deterministic stand-in detector driven by a list of global-coordinate
/// detections: every rule whose centre falls inside a tile is reported by
/// that tile.
#[derive(Debug, Clone, Default)]
pub struct FixtureDetector {
    rules: Vec<Detection>,
}

impl FixtureDetector {
    pub fn new(rules: Vec<Detection>) -> Self {
        Self { rules }
    }

    pub fn rules(&self) -> &[Detection] {
        &self.rules
    }
}

impl DetectorBackend for FixtureDetector {
    fn detect(&self, _tile: &RasterImage, window: &TileWindow) -> Result<Vec<Detection>> {
        let (dx, dy) = (window.origin_col as f64, window.origin_row as f64);
        Ok(self
            .rules
            .iter()
            .filter(|r| window.contains_point(r.bbox.cx(), r.bbox.cy()))
            .map(|r| r.translated(-dx, -dy))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagery::{plan_tiles, TileSpec};
    use crate::obb::OrientedBox;
    use crate::pipeline::CrosswalkClass;

    fn rule(cx: f64, cy: f64) -> Detection {
        Detection::new(OrientedBox::new(cx, cy, 30.0, 8.0, 0.3).unwrap(), CrosswalkClass::Striped, 0.9).unwrap()
    }

    fn reporting_tiles(det: &FixtureDetector, windows: &[TileWindow]) -> Vec<usize> {
        let tile = RasterImage::filled(1, 1, 1, 0).unwrap();
        windows
            .iter()
            .filter(|w| !det.detect(&tile, w).unwrap().is_empty())
            .map(|w| w.tile_index)
            .collect()
    }

    #[test]
    fn empty_rules_report_nothing() {
        let det = FixtureDetector::new(vec![]);
        let windows = plan_tiles(3000, 3000, TileSpec::default());
        assert!(reporting_tiles(&det, &windows).is_empty());
    }

    #[test]
    fn interior_rule_is_reported_once_in_local_coordinates() {
        let det = FixtureDetector::new(vec![rule(300.0, 300.0)]);
        let windows = plan_tiles(3000, 3000, TileSpec::default());
        assert_eq!(reporting_tiles(&det, &windows), vec![0]);

        let w = windows[4];
        let moved = FixtureDetector::new(vec![rule(w.origin_col as f64 + 500.0, w.origin_row as f64 + 400.0)]);
        let got = moved.detect(&RasterImage::filled(1, 1, 1, 0).unwrap(), &w).unwrap();
        assert_eq!((got[0].bbox.cx(), got[0].bbox.cy()), (500.0, 400.0));
    }

    #[test]
    fn overlap_band_rule_is_reported_by_every_containing_tile() {
        let windows = plan_tiles(3000, 3000, TileSpec::default());
        // x = 900 lies in both column bands [0,1024) and [768,1792)
        let (cx, cy) = (900.0, 300.0);
        let det = FixtureDetector::new(vec![rule(cx, cy)]);
        let expected: Vec<usize> = windows
            .iter()
            .filter(|w| {
                let (x0, y0) = (w.origin_col as f64, w.origin_row as f64);
                x0 <= cx && cx < x0 + w.width as f64 && y0 <= cy && cy < y0 + w.height as f64
            })
            .map(|w| w.tile_index)
            .collect();
        assert_eq!(expected.len(), 2);
        assert_eq!(reporting_tiles(&det, &windows), expected);
    }
}
