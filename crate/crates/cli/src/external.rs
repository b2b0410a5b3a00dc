//! Detector backend that runs an external program once per tile.
//!
//! The program is called as `<model> <tile.png> <origin_col> <origin_row> <tile_index>`
//! and must print tile-local detections in the detection text format on stdout.

use std::path::PathBuf;
use std::process::Command;

use crosswalk_core::imagery::save_raster;
use crosswalk_core::pipeline::parse_detections;
use crosswalk_core::{Detection, DetectorBackend, Error, RasterImage, Result, TileWindow};

pub struct ExternalDetector {
    program: PathBuf,
}

impl ExternalDetector {
    pub fn new(program: PathBuf) -> Self {
        Self { program }
    }
}

impl DetectorBackend for ExternalDetector {
    fn detect(&self, tile: &RasterImage, window: &TileWindow) -> Result<Vec<Detection>> {
        let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
        let tile_path = dir.path().join(format!("tile_{}.png", window.tile_index));
        save_raster(tile, &tile_path)?;
        let output = Command::new(&self.program)
            .arg(&tile_path)
            .arg(window.origin_col.to_string())
            .arg(window.origin_row.to_string())
            .arg(window.tile_index.to_string())
            .output()
            .map_err(|e| Error::io(&self.program, e))?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(Error::Unsupported(format!(
                "{} exited with {}: {}",
                self.program.display(),
                output.status,
                stderr.trim()
            )));
        }
        let text = String::from_utf8(output.stdout)
            .map_err(|_| Error::Decode(format!("{} wrote non-UTF-8 output", self.program.display())))?;
        parse_detections(&text)
    }
}
