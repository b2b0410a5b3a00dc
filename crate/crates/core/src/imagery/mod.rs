//! Raster images, tile planning and georeferencing.

mod geo;
mod raster;
mod tiling;

pub use geo::{parse_world_file, read_world_file, GeoTransform};
pub use raster::{load_raster, save_raster, RasterImage};
pub use tiling::{extract_tile, plan_tiles, TileSpec, TileWindow};
