//! Oriented boxes and the convex-polygon machinery behind rotated IoU.

mod oriented;
mod polygon;

pub use oriented::{min_area_rect, normalize_angle, rotated_iou, OrientedBox};
pub use polygon::{clip, polygon_area, signed_area, ConvexPolygon, Point};
