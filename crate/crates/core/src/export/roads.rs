use std::collections::HashMap;
use std::path::Path;

use serde_json::Value;

use super::record::{Category, CrosswalkRecord};
use crate::error::{Error, Result};
use crate::obb::Point;

/// Above this many segments in a layer, distance queries go through a
/// uniform grid instead of a linear scan. Both give identical answers.
pub const GRID_INDEX_THRESHOLD: usize = 10_000;

/// Endpoints closer than this are merged into one node.
const NODE_MERGE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoadClass {
    Road,
    Driveway,
}

impl RoadClass {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "road" => Some(RoadClass::Road),
            "driveway" => Some(RoadClass::Driveway),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadNode {
    pub id: usize,
    pub point: Point,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadEdge {
    pub id: usize,
    pub points: Vec<Point>,
    pub class: RoadClass,
    pub start_node: usize,
    pub end_node: usize,
}

/// Distance thresholds (world units) for road-context classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyThresholds {
    pub driveway: f64,
    pub intersection: f64,
    pub road: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self { driveway: 10.0, intersection: 15.0, road: 25.0 }
    }
}

/// Segments (or points, as zero-length segments) answering "nearest within r".
#[derive(Debug, Clone, Default)]
struct SegmentLayer {
    segments: Vec<(Point, Point)>,
    grid: Option<Grid>,
}

#[derive(Debug, Clone)]
struct Grid {
    cell: f64,
    origin: Point,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * ab.x, a.y + t * ab.y))
}

impl SegmentLayer {
    fn new(segments: Vec<(Point, Point)>) -> Self {
        let grid = (segments.len() > GRID_INDEX_THRESHOLD).then(|| Grid::build(&segments));
        Self { segments, grid }
    }

    fn nearest_linear(&self, p: Point) -> Option<f64> {
        self.segments
            .iter()
            .map(|&(a, b)| point_segment_distance(p, a, b))
            .min_by(f64::total_cmp)
    }

    /// Minimum distance from `p` if some segment lies within `radius`.
    fn nearest_within(&self, p: Point, radius: f64) -> Option<f64> {
        let best = match &self.grid {
            None => self.nearest_linear(p),
            Some(grid) => grid
                .candidates(p, radius)
                .map(|i| {
                    let (a, b) = self.segments[i];
                    point_segment_distance(p, a, b)
                })
                .min_by(f64::total_cmp),
        };
        best.filter(|&d| d <= radius)
    }
}

impl Grid {
    fn build(segments: &[(Point, Point)]) -> Self {
        let (mut lo, mut hi) = (Point::new(f64::MAX, f64::MAX), Point::new(f64::MIN, f64::MIN));
        for &(a, b) in segments {
            for p in [a, b] {
                lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        let cell = extent / (segments.len() as f64).sqrt().max(1.0);
        let mut grid = Grid { cell, origin: lo, buckets: HashMap::new() };
        for (i, &(a, b)) in segments.iter().enumerate() {
            let (c0, r0) = grid.key(Point::new(a.x.min(b.x), a.y.min(b.y)));
            let (c1, r1) = grid.key(Point::new(a.x.max(b.x), a.y.max(b.y)));
            for c in c0..=c1 {
                for r in r0..=r1 {
                    grid.buckets.entry((c, r)).or_default().push(i);
                }
            }
        }
        grid
    }

    fn key(&self, p: Point) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.cell).floor() as i64,
            ((p.y - self.origin.y) / self.cell).floor() as i64,
        )
    }

    fn candidates(&self, p: Point, radius: f64) -> impl Iterator<Item = usize> + '_ {
        let (c0, r0) = self.key(Point::new(p.x - radius, p.y - radius));
        let (c1, r1) = self.key(Point::new(p.x + radius, p.y + radius));
        let mut ids: Vec<usize> = (c0..=c1)
            .flat_map(|c| (r0..=r1).map(move |r| (c, r)))
            .filter_map(|k| self.buckets.get(&k))
            .flatten()
            .copied()
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RoadNetwork {
    nodes: Vec<RoadNode>,
    edges: Vec<RoadEdge>,
    driveways: SegmentLayer,
    roads: SegmentLayer,
    junctions: SegmentLayer,
}

impl RoadNetwork {
    /// Builds the node table from polyline endpoints, merging endpoints
    /// within 1e-6 world units.
    pub fn from_polylines(lines: Vec<(Vec<Point>, RoadClass)>) -> Result<Self> {
        let mut nodes: Vec<RoadNode> = Vec::new();
        let mut lookup: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let cell_of = |p: Point| {
            (
                (p.x / NODE_MERGE_TOLERANCE).floor() as i64,
                (p.y / NODE_MERGE_TOLERANCE).floor() as i64,
            )
        };
        let mut node_for = |p: Point, nodes: &mut Vec<RoadNode>| -> usize {
            let (cx, cy) = cell_of(p);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(ids) = lookup.get(&(cx + dx, cy + dy)) {
                        if let Some(&id) = ids.iter().find(|&&id| nodes[id].point.distance(p) <= NODE_MERGE_TOLERANCE) {
                            return id;
                        }
                    }
                }
            }
            let id = nodes.len();
            nodes.push(RoadNode { id, point: p, degree: 0 });
            lookup.entry((cx, cy)).or_default().push(id);
            id
        };

        let mut edges = Vec::with_capacity(lines.len());
        for (points, class) in lines {
            if points.len() < 2 {
                return Err(Error::Validation(format!(
                    "road polyline {} has {} point(s); at least 2 required",
                    edges.len(),
                    points.len()
                )));
            }
            if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(Error::Validation("road coordinates must be finite".into()));
            }
            let start_node = node_for(points[0], &mut nodes);
            let end_node = node_for(*points.last().unwrap(), &mut nodes);
            nodes[start_node].degree += 1;
            nodes[end_node].degree += 1;
            edges.push(RoadEdge { id: edges.len(), points, class, start_node, end_node });
        }

        let layer = |class: RoadClass| {
            SegmentLayer::new(
                edges
                    .iter()
                    .filter(|e| e.class == class)
                    .flat_map(|e| e.points.windows(2).map(|w| (w[0], w[1])))
                    .collect(),
            )
        };
        let driveways = layer(RoadClass::Driveway);
        let roads = layer(RoadClass::Road);
        let junctions = SegmentLayer::new(
            nodes.iter().filter(|n| n.degree >= 3).map(|n| (n.point, n.point)).collect(),
        );
        Ok(Self { nodes, edges, driveways, roads, junctions })
    }

    pub fn nodes(&self) -> &[RoadNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Assigns a category to the point using the precedence
    /// driveway > intersection > mid-block.
    pub fn categorize(&self, p: Point, t: &ClassifyThresholds) -> Category {
        if self.is_empty() {
            log::warn!("road network is empty; crosswalk left unclassified");
            return Category::Unclassified;
        }
        if self.driveways.nearest_within(p, t.driveway).is_some() {
            Category::Driveway
        } else if self.junctions.nearest_within(p, t.intersection).is_some() {
            Category::Intersection
        } else if self.roads.nearest_within(p, t.road).is_some() {
            Category::MidBlock
        } else {
            Category::Unclassified
        }
    }
}

pub fn classify(record: &CrosswalkRecord, net: &RoadNetwork, thresholds: &ClassifyThresholds) -> Category {
    net.categorize(record.centroid(), thresholds)
}

pub fn classify_all(records: &mut [CrosswalkRecord], net: &RoadNetwork, thresholds: &ClassifyThresholds) {
    for r in records {
        r.category = classify(r, net, thresholds);
    }
}

fn parse_coords(value: &Value) -> Option<Vec<Point>> {
    value
        .as_array()?
        .iter()
        .map(|c| {
            let c = c.as_array()?;
            Some(Point::new(c.first()?.as_f64()?, c.get(1)?.as_f64()?))
        })
        .collect()
}

/// Reads a GeoJSON FeatureCollection of `LineString` / `MultiLineString`
/// features, each carrying a `road_class` property of `road` or `driveway`.
pub fn load_road_network(text: &str) -> Result<RoadNetwork> {
    if text.trim().is_empty() {
        return RoadNetwork::from_polylines(Vec::new());
    }
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line(), format!("invalid road network document: {e}")))?;
    let features = match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => doc
            .get("features")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse(0, "FeatureCollection without a features array"))?
            .clone(),
        Some("Feature") => vec![doc.clone()],
        _ => return Err(Error::parse(0, "expected a GeoJSON FeatureCollection")),
    };

    let mut lines = Vec::new();
    for (i, f) in features.iter().enumerate() {
        let class_name = f
            .pointer("/properties/road_class")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Validation(format!("feature {i} has no road_class property")))?;
        let class = RoadClass::parse(class_name)
            .ok_or_else(|| Error::Validation(format!("feature {i}: unknown road_class {class_name:?}")))?;
        let geom = f
            .get("geometry")
            .ok_or_else(|| Error::parse(0, format!("feature {i} has no geometry")))?;
        let coords = geom.get("coordinates").unwrap_or(&Value::Null);
        let bad = || Error::parse(0, format!("feature {i}: malformed coordinates"));
        match geom.get("type").and_then(Value::as_str) {
            Some("LineString") => lines.push((parse_coords(coords).ok_or_else(bad)?, class)),
            Some("MultiLineString") => {
                for part in coords.as_array().ok_or_else(bad)? {
                    lines.push((parse_coords(part).ok_or_else(bad)?, class));
                }
            }
            other => {
                return Err(Error::parse(0, format!("feature {i}: unsupported geometry {other:?}")))
            }
        }
    }
    RoadNetwork::from_polylines(lines)
}

pub fn read_road_network(path: impl AsRef<Path>) -> Result<RoadNetwork> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_road_network(&text)
}
