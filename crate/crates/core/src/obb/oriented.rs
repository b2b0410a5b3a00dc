use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::polygon::{clip, polygon_area, ConvexPolygon, Point};
use crate::error::{Error, Result};

/// Maps any angle into `[-pi/2, pi/2)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut r = theta - PI * ((theta + FRAC_PI_2) / PI).floor();
    if r >= FRAC_PI_2 {
        r -= PI;
    }
    if r < -FRAC_PI_2 {
        r += PI;
    }
    r
}

/// Rotated rectangle. `theta` is the angle from +x to the `w` edge, kept in
/// `[-pi/2, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta: f64,
}

impl OrientedBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self> {
        if ![cx, cy, w, h, theta].iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("box fields must be finite".into()));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::Validation(format!(
                "box sides must be positive, got {w}x{h}"
            )));
        }
        Ok(Self {
            cx,
            cy,
            w,
            h,
            theta: normalize_angle(theta),
        })
    }

    /// Axis-aligned box from its centre and size.
    pub fn axis_aligned(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(cx, cy, w, h, 0.0)
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            cx: self.cx + dx,
            cy: self.cy + dy,
            ..*self
        }
    }

    pub fn with_center(&self, cx: f64, cy: f64) -> Self {
        Self { cx, cy, ..*self }
    }

    pub fn rotated_by(&self, angle: f64) -> Self {
        Self {
            theta: normalize_angle(self.theta + angle),
            ..*self
        }
    }

    /// The same rectangle described with `w`/`h` swapped and the angle turned
    /// a quarter turn.
    pub fn swapped(&self) -> Self {
        Self {
            w: self.h,
            h: self.w,
            theta: normalize_angle(self.theta + FRAC_PI_2),
            ..*self
        }
    }

    /// Representation with `theta` in `[-pi/4, pi/4)`.
    pub fn canonical(&self) -> Self {
        if self.theta >= FRAC_PI_4 || self.theta < -FRAC_PI_4 {
            self.swapped()
        } else {
            *self
        }
    }

    /// Radius of the circumscribed circle.
    pub fn circumradius(&self) -> f64 {
        0.5 * self.w.hypot(self.h)
    }

    /// Whether `p` lies inside the rectangle (boundary included).
    pub fn contains(&self, p: Point) -> bool {
        let (s, c) = self.theta.sin_cos();
        let (dx, dy) = (p.x - self.cx, p.y - self.cy);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        u.abs() <= 0.5 * self.w && v.abs() <= 0.5 * self.h
    }

    /// Corner points, counter-clockwise in a y-up frame.
    pub fn corner_points(&self) -> [Point; 4] {
        let (s, c) = self.theta.sin_cos();
        let (hw, hh) = (0.5 * self.w, 0.5 * self.h);
        [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
            .map(|(u, v)| Point::new(self.cx + c * u - s * v, self.cy + s * u + c * v))
    }

    pub fn corners(&self) -> ConvexPolygon {
        ConvexPolygon::new(self.corner_points().to_vec())
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cx
            .total_cmp(&other.cx)
            .then(self.cy.total_cmp(&other.cy))
            .then(self.w.total_cmp(&other.w))
            .then(self.h.total_cmp(&other.h))
            .then(self.theta.total_cmp(&other.theta))
    }
}

/// Intersection over union of two rotated rectangles.
pub fn rotated_iou(a: &OrientedBox, b: &OrientedBox) -> f64 {
    // fixed argument order makes the result exactly symmetric
    let (a, b) = if a.total_cmp(b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    if a.center().distance(b.center()) >= a.circumradius() + b.circumradius() {
        return 0.0;
    }
    let inter = polygon_area(&clip(&a.corners(), &b.corners()));
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Minimum-area enclosing rectangle of a point set (rotating calipers over
/// the convex hull), returned in canonical form. `None` for collinear input.
pub fn min_area_rect(points: &[Point]) -> Option<OrientedBox> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return None;
    }
    let mut best: Option<(f64, OrientedBox)> = None;
    for i in 0..hull.len() {
        let edge = hull[(i + 1) % hull.len()].sub(hull[i]);
        let len = edge.x.hypot(edge.y);
        if len == 0.0 {
            continue;
        }
        let u = Point::new(edge.x / len, edge.y / len);
        let v = Point::new(-u.y, u.x);
        let (mut umin, mut umax, mut vmin, mut vmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        let origin = hull[i];
        for p in &hull {
            let d = p.sub(origin);
            let (pu, pv) = (d.dot(u), d.dot(v));
            umin = umin.min(pu);
            umax = umax.max(pu);
            vmin = vmin.min(pv);
            vmax = vmax.max(pv);
        }
        let (w, h) = (umax - umin, vmax - vmin);
        let area = w * h;
        if best.as_ref().is_some_and(|(a, _)| area >= *a * (1.0 - 1e-12)) {
            continue;
        }
        let (mu, mv) = (0.5 * (umin + umax), 0.5 * (vmin + vmax));
        let cx = origin.x + u.x * mu + v.x * mv;
        let cy = origin.y + u.y * mu + v.y * mv;
        if let Ok(b) = OrientedBox::new(cx, cy, w, h, u.y.atan2(u.x)) {
            best = Some((area, b));
        }
    }
    best.map(|(_, b)| b.canonical())
}

/// Andrew's monotone chain; counter-clockwise, no collinear points.
fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| a.sub(o).cross(b.sub(o));
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() * 2);
    for &p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}
