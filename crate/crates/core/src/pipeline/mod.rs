//! Sliced inference: tile, detect, lift to global coordinates, merge.

mod backend;
mod detection;
mod nms;

use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use backend::{DetectorBackend, FixtureDetector};
pub use detection::{
    format_detections, parse_detection_line, parse_detections, read_detections, sort_for_output,
    write_detections, CrosswalkClass, Detection,
};
pub use nms::{nms_indices, rotated_nms};

use crate::error::{Error, Result};
use crate::export::{detection_to_record, CrosswalkRecord};
use crate::imagery::{extract_tile, plan_tiles, GeoTransform, RasterImage, TileSpec, TileWindow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub conf_threshold: f64,
    pub nms_iou: f64,
    pub class_agnostic_nms: bool,
    /// Convert RGB tiles to single-band luma before detection.
    pub grayscale: bool,
    pub tile_spec: TileSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            conf_threshold: 0.25,
            nms_iou: 0.5,
            class_agnostic_nms: true,
            grayscale: false,
            tile_spec: TileSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("conf_threshold", self.conf_threshold), ("nms_iou", self.nms_iou)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Validation(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// Runs the backend on one tile, drops low-confidence boxes and shifts the
/// rest into global pixel coordinates.
pub fn run_tile(
    backend: &dyn DetectorBackend,
    tile: &RasterImage,
    window: &TileWindow,
    conf_threshold: f64,
) -> Result<Vec<Detection>> {
    let wrap = |message: String| Error::Backend { tile_index: window.tile_index, message };
    if (tile.width(), tile.height()) != (window.width, window.height) {
        return Err(wrap(format!(
            "tile is {}x{} but window is {}x{}",
            tile.width(),
            tile.height(),
            window.width,
            window.height
        )));
    }
    let local = backend.detect(tile, window).map_err(|e| match e {
        Error::Backend { .. } => e,
        other => wrap(other.to_string()),
    })?;

    // detectors may overshoot the tile border slightly, but not by more than a quarter patch
    let margin = window.width.max(window.height) as f64 / 4.0;
    let (w, h) = (window.width as f64, window.height as f64);
    let (dx, dy) = (window.origin_col as f64, window.origin_row as f64);
    let mut lifted = Vec::with_capacity(local.len());
    for det in local {
        let inside = det.bbox.corner_points().iter().all(|p| {
            p.x >= -margin && p.x <= w + margin && p.y >= -margin && p.y <= h + margin
        });
        if !inside {
            return Err(wrap(format!(
                "detection at ({}, {}) extends beyond the tile margin",
                det.bbox.cx(),
                det.bbox.cy()
            )));
        }
        if det.score >= conf_threshold {
            lifted.push(det.translated(dx, dy));
        }
    }
    Ok(lifted)
}

/// Concatenates per-tile results in tile order and suppresses duplicates.
/// The result does not depend on the order of `per_tile`.
pub fn merge_tiles(per_tile: &[(TileWindow, Vec<Detection>)], cfg: &PipelineConfig) -> Vec<Detection> {
    let mut ordered: Vec<&(TileWindow, Vec<Detection>)> = per_tile.iter().collect();
    ordered.sort_by_key(|(w, _)| w.tile_index);
    let all: Vec<Detection> = ordered.iter().flat_map(|(_, d)| d.iter().copied()).collect();
    rotated_nms(&all, cfg.nms_iou, cfg.class_agnostic_nms)
}

#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub tiles: usize,
    pub workers: usize,
    /// Detections surviving the confidence filter, before merging.
    pub raw_detections: usize,
    pub merged_detections: usize,
    /// Sum of per-tile extraction + detection time across workers.
    pub tile_time: Duration,
    pub merge_time: Duration,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct ProcessOutput {
    pub detections: Vec<Detection>,
    /// Georeferenced records, when a transform was supplied.
    pub records: Option<Vec<CrosswalkRecord>>,
    pub provenance: Provenance,
}

/// Full sliced-inference pass over one raster using `workers` threads.
/// Output is identical for every worker count.
pub fn process_image(
    image: &RasterImage,
    geotransform: Option<&GeoTransform>,
    backend: &dyn DetectorBackend,
    cfg: &PipelineConfig,
    workers: usize,
) -> Result<ProcessOutput> {
    cfg.validate()?;
    if workers == 0 {
        return Err(Error::Validation("worker count must be >= 1".into()));
    }
    let start = Instant::now();
    let windows = plan_tiles(image.width(), image.height(), cfg.tile_spec);

    let work = |window: &TileWindow| -> (Result<Vec<Detection>>, Duration) {
        let t0 = Instant::now();
        let result = extract_tile(image, window).and_then(|tile| {
            let tile = if cfg.grayscale { tile.to_grayscale() } else { tile };
            run_tile(backend, &tile, window, cfg.conf_threshold)
        });
        (result, t0.elapsed())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(Result<Vec<Detection>>, Duration)> =
        pool.install(|| windows.par_iter().map(work).collect());

    let mut per_tile = Vec::with_capacity(windows.len());
    let mut failures = Vec::new();
    let mut tile_time = Duration::ZERO;
    for (window, (result, took)) in windows.iter().zip(results) {
        tile_time += took;
        match result {
            Ok(dets) => per_tile.push((*window, dets)),
            Err(e) => failures.push((window.tile_index, e.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(Error::TileFailures(failures));
    }

    let raw_detections = per_tile.iter().map(|(_, d)| d.len()).sum();
    let merge_start = Instant::now();
    let detections = merge_tiles(&per_tile, cfg);
    let merge_time = merge_start.elapsed();
    let records = geotransform.map(|gt| detections.iter().map(|d| detection_to_record(d, gt)).collect());

    Ok(ProcessOutput {
        provenance: Provenance {
            tiles: windows.len(),
            workers,
            raw_detections,
            merged_detections: detections.len(),
            tile_time,
            merge_time,
            wall_time: start.elapsed(),
        },
        detections,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obb::OrientedBox;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn det(cx: f64, cy: f64, score: f64) -> Detection {
        Detection::new(OrientedBox::new(cx, cy, 24.0, 6.0, 0.4).unwrap(), CrosswalkClass::Striped, score).unwrap()
    }

    struct Failing;
    impl DetectorBackend for Failing {
        fn detect(&self, _: &RasterImage, w: &TileWindow) -> Result<Vec<Detection>> {
            if w.tile_index == 1 {
                Err(Error::Unsupported("model crashed".into()))
            } else {
                Ok(vec![])
            }
        }
    }

    struct Overshoot;
    impl DetectorBackend for Overshoot {
        fn detect(&self, _: &RasterImage, _: &TileWindow) -> Result<Vec<Detection>> {
            Ok(vec![det(-500.0, 10.0, 0.9)])
        }
    }

    fn window(col: usize, row: usize) -> TileWindow {
        TileWindow { origin_col: col, origin_row: row, width: 1024, height: 1024, tile_index: 0 }
    }

    #[test]
    fn run_tile_filters_and_translates() {
        let tile = RasterImage::filled(1024, 1024, 1, 0).unwrap();
        let w = window(768, 0);
        let backend = FixtureDetector::new(vec![det(778.0, 10.0, 0.9), det(900.0, 50.0, 0.2)]);
        let got = run_tile(&backend, &tile, &w, 0.25).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].bbox.cx(), got[0].bbox.cy()), (778.0, 10.0));
        assert_eq!(got[0].bbox.theta(), det(0.0, 0.0, 0.5).bbox.theta());

        let none = run_tile(&FixtureDetector::default(), &tile, &w, 0.25).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn run_tile_reports_tile_index() {
        let tile = RasterImage::filled(1024, 1024, 1, 0).unwrap();
        let mut w = window(0, 0);
        w.tile_index = 1;
        assert!(matches!(run_tile(&Failing, &tile, &w, 0.25), Err(Error::Backend { tile_index: 1, .. })));
        assert!(matches!(run_tile(&Overshoot, &tile, &w, 0.25), Err(Error::Backend { .. })));
    }

    #[test]
    fn merge_dedups_and_ignores_input_order() {
        let cfg = PipelineConfig::default();
        let a = (window(0, 0), vec![det(900.0, 300.0, 0.9)]);
        let mut b = (window(768, 0), vec![det(900.0, 300.0, 0.9), det(1500.0, 300.0, 0.7)]);
        b.0.tile_index = 1;
        let merged = merge_tiles(&[a.clone(), b.clone()], &cfg);
        assert_eq!(merged.len(), 2);
        assert_eq!(merge_tiles(&[b, a], &cfg), merged);
    }

    #[test]
    fn merge_equals_single_pass_nms() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cfg = PipelineConfig::default();
        for _ in 0..20 {
            let per_tile: Vec<(TileWindow, Vec<Detection>)> = (0..3)
                .map(|t| {
                    let mut w = window(0, 0);
                    w.tile_index = t;
                    let dets = (0..rng.gen_range(0..12))
                        .map(|_| det(rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0), rng.gen_range(0.0..1.0)))
                        .collect();
                    (w, dets)
                })
                .collect();
            let flat: Vec<Detection> = per_tile.iter().flat_map(|(_, d)| d.clone()).collect();
            assert_eq!(merge_tiles(&per_tile, &cfg), rotated_nms(&flat, 0.5, true));
        }
    }

    #[test]
    fn process_blank_and_planted() {
        let image = RasterImage::filled(2500, 2100, 1, 0).unwrap();
        let cfg = PipelineConfig::default();
        let out = process_image(&image, None, &FixtureDetector::default(), &cfg, 2).unwrap();
        assert!(out.detections.is_empty());
        assert_eq!(out.provenance.tiles, 9);

        let planted = vec![det(100.0, 100.0, 0.9), det(900.0, 900.0, 0.8), det(2400.0, 2000.0, 0.7)];
        let out = process_image(&image, None, &FixtureDetector::new(planted.clone()), &cfg, 3).unwrap();
        assert_eq!(out.detections.len(), 3);
        assert!(out.provenance.raw_detections > 3);
        for p in &planted {
            assert!(out.detections.iter().any(|d| d.bbox.cx() == p.bbox.cx() && d.bbox.cy() == p.bbox.cy()));
        }
        let serial = process_image(&image, None, &FixtureDetector::new(planted), &cfg, 1).unwrap();
        assert_eq!(serial.detections, out.detections);
    }

    #[test]
    fn process_aggregates_failures() {
        let image = RasterImage::filled(2000, 1000, 1, 0).unwrap();
        let err = process_image(&image, None, &Failing, &PipelineConfig::default(), 2).unwrap_err();
        match err {
            Error::TileFailures(f) => assert_eq!(f.iter().map(|(t, _)| *t).collect::<Vec<_>>(), vec![1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = PipelineConfig::default();
        cfg.nms_iou = 1.0;
        assert!(cfg.validate().is_err());
        let image = RasterImage::filled(10, 10, 1, 0).unwrap();
        assert!(process_image(&image, None, &FixtureDetector::default(), &PipelineConfig::default(), 0).is_err());
    }
}
