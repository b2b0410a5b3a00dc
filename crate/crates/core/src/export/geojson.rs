use std::fmt::Write as _;
use std::path::Path;

use super::record::CrosswalkRecord;
use crate::error::{Error, Result};

/// GeoJSON FeatureCollection of polygon features. Rings are the same closed
/// clockwise rings written to the shapefile; coordinates carry 9 decimals.
pub fn geojson_like_string(records: &[CrosswalkRecord]) -> String {
    let mut out = String::from("{\"type\":\"FeatureCollection\",\"features\":[");
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("\n{\"type\":\"Feature\",\"properties\":{");
        let _ = write!(
            out,
            "\"category\":\"{}\",\"class\":{},\"score\":{:.9},\"area_m2\":{:.9},\"angle_deg\":{:.9}",
            r.category,
            r.class.id(),
            r.score,
            r.area_m2,
            r.angle_deg
        );
        out.push_str("},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[");
        for (j, p) in r.clockwise_ring().iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "[{:.9},{:.9}]", p.x, p.y);
        }
        out.push_str("]]}}");
    }
    out.push_str("\n]}\n");
    out
}

pub fn write_geojson_like(records: &[CrosswalkRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, geojson_like_string(records)).map_err(|e| Error::io(path, e))
}
