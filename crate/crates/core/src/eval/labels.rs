use std::path::Path;

use crate::error::{Error, Result};
use crate::obb::{min_area_rect, OrientedBox, Point};
use crate::pipeline::CrosswalkClass;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthBox {
    pub bbox: OrientedBox,
    pub class: CrosswalkClass,
}

/// Parses `class x1 y1 x2 y2 x3 y3 x4 y4` rows with coordinates normalised
/// by the image size. Each quadrilateral becomes its minimum-area enclosing
/// rectangle in pixel units. Blank lines are skipped.
pub fn parse_obb_labels(text: &str, image_width: usize, image_height: usize) -> Result<Vec<GroundTruthBox>> {
    let (sx, sy) = (image_width as f64, image_height as f64);
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 9 {
            return Err(Error::parse(line_no, format!("expected 9 fields, found {}", tokens.len())));
        }
        let class_id: u32 = tokens[0]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad class id {:?}", tokens[0])))?;
        let class = CrosswalkClass::from_id(class_id).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let mut corners = Vec::with_capacity(4);
        for pair in tokens[1..].chunks(2) {
            let coord = |t: &str| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(line_no, format!("not a coordinate: {t:?}")))
            };
            corners.push(Point::new(coord(pair[0])? * sx, coord(pair[1])? * sy));
        }
        let bbox = min_area_rect(&corners)
            .ok_or_else(|| Error::parse(line_no, "degenerate quadrilateral"))?;
        out.push(GroundTruthBox { bbox, class });
    }
    Ok(out)
}

pub fn read_obb_labels(path: impl AsRef<Path>, image_width: usize, image_height: usize) -> Result<Vec<GroundTruthBox>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obb_labels(&text, image_width, image_height)
}

/// Inverse of [`parse_obb_labels`]: one normalised corner row per box.
pub fn format_obb_labels(labels: &[GroundTruthBox], image_width: usize, image_height: usize) -> String {
    let (sx, sy) = (image_width as f64, image_height as f64);
    let mut out = String::new();
    for gt in labels {
        out.push_str(&gt.class.id().to_string());
        for p in gt.bbox.corner_points() {
            out.push_str(&format!(" {} {}", p.x / sx, p.y / sy));
        }
        out.push('\n');
    }
    out
}
