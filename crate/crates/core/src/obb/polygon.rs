/// Vertices closer than this to a clipping line count as inside it.
const INSIDE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Counter-clockwise convex polygon. No vertices means "empty".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Wraps vertices; clockwise input is reversed to counter-clockwise and
    /// fewer than three vertices give the empty polygon.
    pub fn new(mut vertices: Vec<Point>) -> Self {
        if vertices.len() < 3 {
            return Self::empty();
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self { vertices }
    }

    pub fn empty() -> Self {
        Self { vertices: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        polygon_area(self)
    }

    /// Area-weighted centroid; falls back to the vertex mean for degenerate rings.
    pub fn centroid(&self) -> Option<Point> {
        centroid_of(&self.vertices)
    }
}

pub(crate) fn centroid_of(vertices: &[Point]) -> Option<Point> {
    if vertices.is_empty() {
        return None;
    }
    let n = vertices.len();
    let (mut cx, mut cy, mut twice_area) = (0.0, 0.0, 0.0);
    // shift to the first vertex to keep large world coordinates well conditioned
    let origin = vertices[0];
    for i in 0..n {
        let p = vertices[i].sub(origin);
        let q = vertices[(i + 1) % n].sub(origin);
        let w = p.cross(q);
        twice_area += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if twice_area.abs() < f64::EPSILON {
        let sx: f64 = vertices.iter().map(|p| p.x).sum();
        let sy: f64 = vertices.iter().map(|p| p.y).sum();
        return Some(Point::new(sx / n as f64, sy / n as f64));
    }
    Some(Point::new(
        origin.x + cx / (3.0 * twice_area),
        origin.y + cy / (3.0 * twice_area),
    ))
}

/// Shoelace signed area: positive for counter-clockwise rings (x right, y up).
pub fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let origin = vertices[0];
    let mut sum = 0.0;
    for i in 1..n - 1 {
        sum += vertices[i].sub(origin).cross(vertices[i + 1].sub(origin));
    }
    0.5 * sum
}

pub fn polygon_area(polygon: &ConvexPolygon) -> f64 {
    signed_area(&polygon.vertices).abs()
}

/// Sutherland-Hodgman: intersection of `subject` with convex `clipper`.
pub fn clip(subject: &ConvexPolygon, clipper: &ConvexPolygon) -> ConvexPolygon {
    if subject.is_empty() || clipper.is_empty() {
        return ConvexPolygon::empty();
    }
    let mut output = subject.vertices.clone();
    let mut input = Vec::with_capacity(output.len() + 4);
    let edges = clipper.vertices.len();
    for i in 0..edges {
        let a = clipper.vertices[i];
        let b = clipper.vertices[(i + 1) % edges];
        let dir = b.sub(a);
        let len = dir.x.hypot(dir.y);
        if len == 0.0 {
            continue;
        }
        // signed distance from the edge line, positive on the inner (left) side
        let side = |p: Point| dir.cross(p.sub(a)) / len;

        std::mem::swap(&mut input, &mut output);
        output.clear();
        let n = input.len();
        for j in 0..n {
            let cur = input[j];
            let prev = input[(j + n - 1) % n];
            let (sc, sp) = (side(cur), side(prev));
            let cur_in = sc >= -INSIDE_EPS;
            let prev_in = sp >= -INSIDE_EPS;
            if cur_in {
                if !prev_in {
                    output.push(intersect(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if prev_in {
                output.push(intersect(prev, cur, sp, sc));
            }
        }
        if output.len() < 3 {
            return ConvexPolygon::empty();
        }
    }
    ConvexPolygon { vertices: output }
}

fn intersect(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}
