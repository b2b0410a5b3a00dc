use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imagery::GeoTransform;
use crate::obb::{signed_area, Point};
use crate::pipeline::{CrosswalkClass, Detection};

/// Road-context category of a crosswalk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Intersection,
    MidBlock,
    Driveway,
    Unclassified,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Intersection => "intersection",
            Category::MidBlock => "mid_block",
            Category::Driveway => "driveway",
            Category::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "intersection" => Ok(Category::Intersection),
            "mid_block" => Ok(Category::MidBlock),
            "driveway" => Ok(Category::Driveway),
            "unclassified" => Ok(Category::Unclassified),
            other => Err(Error::Validation(format!("unknown category {other:?}"))),
        }
    }
}

/// A detection in world coordinates, ready for export.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosswalkRecord {
    pub polygon: [Point; 4],
    pub category: Category,
    pub class: CrosswalkClass,
    pub score: f64,
    /// Polygon area in squared world units (square metres for metric CRSs).
    pub area_m2: f64,
    /// Direction of the box's `w` edge in world space, degrees in `[-90, 90)`.
    pub angle_deg: f64,
}

impl CrosswalkRecord {
    pub fn centroid(&self) -> Point {
        let sx: f64 = self.polygon.iter().map(|p| p.x).sum();
        let sy: f64 = self.polygon.iter().map(|p| p.y).sum();
        Point::new(sx / 4.0, sy / 4.0)
    }

    /// Closed five-point ring with clockwise winding (negative shoelace area),
    /// as stored in shapefiles.
    pub fn clockwise_ring(&self) -> [Point; 5] {
        let mut pts = self.polygon;
        if signed_area(&pts) > 0.0 {
            pts.reverse();
        }
        [pts[0], pts[1], pts[2], pts[3], pts[0]]
    }
}

fn wrap_degrees(deg: f64) -> f64 {
    let mut d = deg - 180.0 * ((deg + 90.0) / 180.0).floor();
    if d >= 90.0 {
        d -= 180.0;
    }
    if d < -90.0 {
        d += 180.0;
    }
    d
}

/// Maps a pixel-space detection through the geotransform.
pub fn detection_to_record(det: &Detection, gt: &GeoTransform) -> CrosswalkRecord {
    let polygon = det.bbox.corner_points().map(|p| {
        let (x, y) = gt.pixel_to_world(p.x, p.y);
        Point::new(x, y)
    });
    let (sin, cos) = det.bbox.theta().sin_cos();
    let (vx, vy) = gt.map_vector(cos, sin);
    CrosswalkRecord {
        polygon,
        category: Category::Unclassified,
        class: det.class,
        score: det.score,
        area_m2: signed_area(&polygon).abs(),
        angle_deg: wrap_degrees(vy.atan2(vx).to_degrees()),
    }
}
