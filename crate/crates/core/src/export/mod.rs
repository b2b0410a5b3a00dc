//! Georeferenced crosswalk records, road-context classification and vector
//! file output.

mod geojson;
mod record;
mod roads;
mod shapefile;

pub use geojson::{geojson_like_string, write_geojson_like};
pub use record::{detection_to_record, Category, CrosswalkRecord};
pub use roads::{
    classify, classify_all, load_road_network, read_road_network, ClassifyThresholds, RoadClass,
    RoadEdge, RoadNetwork, RoadNode, GRID_INDEX_THRESHOLD,
};
pub use shapefile::{
    read_shapefile, shapefile_bytes, sidecar_path, write_shapefile, ShapefileBytes, ShapefileRecord,
};
