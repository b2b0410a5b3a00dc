use std::path::Path;

use crate::error::{Error, Result};

/// Affine map from pixel-centre coordinates `(col, row)` to world `(x, y)`,
/// using world-file coefficient names:
///
/// ```text
/// x = a * col + b * row + c
/// y = d * col + e * row + f
/// ```
///
/// `(c, f)` is the world position of the *centre* of pixel (0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoTransform {
    pub a: f64,
    pub d: f64,
    pub b: f64,
    pub e: f64,
    pub c: f64,
    pub f: f64,
}

impl GeoTransform {
    /// Validated transform; rejects non-finite coefficients and singular matrices.
    pub fn new(a: f64, d: f64, b: f64, e: f64, c: f64, f: f64) -> Result<Self> {
        let gt = Self { a, d, b, e, c, f };
        gt.validate()?;
        Ok(gt)
    }

    /// North-up transform with square pixels of `pixel_size` world units.
    pub fn north_up(pixel_size: f64, origin_x: f64, origin_y: f64) -> Result<Self> {
        Self::new(pixel_size, 0.0, 0.0, -pixel_size, origin_x, origin_y)
    }

    pub fn identity() -> Self {
        Self { a: 1.0, d: 0.0, b: 0.0, e: 1.0, c: 0.0, f: 0.0 }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.e - self.b * self.d
    }

    pub fn validate(&self) -> Result<()> {
        let coeffs = [self.a, self.d, self.b, self.e, self.c, self.f];
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("geotransform coefficients must be finite".into()));
        }
        let det = self.determinant();
        let scale = self.a.abs().max(self.b.abs()) * self.d.abs().max(self.e.abs());
        if det == 0.0 || det.abs() <= scale * 1e-14 {
            return Err(Error::Validation(format!(
                "geotransform is singular (determinant {det})"
            )));
        }
        Ok(())
    }

    pub fn pixel_to_world(&self, col: f64, row: f64) -> (f64, f64) {
        (
            self.a * col + self.b * row + self.c,
            self.d * col + self.e * row + self.f,
        )
    }

    /// Inverse of [`pixel_to_world`](Self::pixel_to_world).
    pub fn world_to_pixel(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Validation("cannot invert singular geotransform".into()));
        }
        let (dx, dy) = (x - self.c, y - self.f);
        Ok(((self.e * dx - self.b * dy) / det, (self.a * dy - self.d * dx) / det))
    }

    /// Maps a pixel-space direction (no translation).
    pub fn map_vector(&self, dcol: f64, drow: f64) -> (f64, f64) {
        (self.a * dcol + self.b * drow, self.d * dcol + self.e * drow)
    }

    /// Six lines in world-file order a, d, b, e, c, f.
    pub fn to_world_file(&self) -> String {
        format!(
            "{}\n{}\n{}\n{}\n{}\n{}\n",
            self.a, self.d, self.b, self.e, self.c, self.f
        )
    }
}

/// Parses a world file: six numbers, one per line, in the order a, d, b, e, c, f.
/// Blank lines are ignored.
pub fn parse_world_file(text: &str) -> Result<GeoTransform> {
    let mut values = Vec::with_capacity(6);
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if values.len() == 6 {
            return Err(Error::parse(idx + 1, "world file has more than six values"));
        }
        let v: f64 = trimmed
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("not a number: {trimmed:?}")))?;
        values.push(v);
    }
    if values.len() != 6 {
        return Err(Error::parse(
            text.lines().count(),
            format!("world file needs six values, found {}", values.len()),
        ));
    }
    GeoTransform::new(values[0], values[1], values[2], values[3], values[4], values[5])
}

pub fn read_world_file(path: impl AsRef<Path>) -> Result<GeoTransform> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_world_file(&text)
}
