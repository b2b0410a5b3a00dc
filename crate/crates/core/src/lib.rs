//! Oriented crosswalk detection over very large aerial rasters.
//!
//! The crate is organised by pipeline stage:
//!
//! 1. [`imagery`]: raster model, grayscale conversion, overlapping tile plans, world files.
//! 2. [`obb`]: oriented boxes, convex clipping and rotated IoU.
//! 3. [`pipeline`]: pluggable per-tile detectors, rotated NMS and cross-tile merging.
//! 4. [`export`]: georeferenced records, road-context classification, shapefile / GeoJSON output.
//! 5. [`eval`]: label parsing, matching, precision / recall and mAP.
//! 6. [`augment`]: seeded rotation, mosaic and HSV augmentation of labelled samples.
//! 7. [`nn`]: forward-only reference math for the dual-branch SPPF and Soft-CBAM blocks
//!    and the cosine learning-rate schedule.

pub mod augment;
pub mod error;
pub mod eval;
pub mod export;
pub mod imagery;
pub mod nn;
pub mod obb;
pub mod pipeline;

pub use error::{Error, Result};
pub use eval::GroundTruthBox;
pub use export::{Category, CrosswalkRecord, RoadNetwork};
pub use imagery::{GeoTransform, RasterImage, TileSpec, TileWindow};
pub use obb::{ConvexPolygon, OrientedBox, Point};
pub use pipeline::{CrosswalkClass, Detection, DetectorBackend, PipelineConfig};
