use super::{AugmentRng, Sample, FILL_VALUE};
use crate::error::{Error, Result};
use crate::eval::GroundTruthBox;
use crate::imagery::RasterImage;
use crate::obb::OrientedBox;

/// Largest rotation magnitude, 8 degrees.
pub const MAX_ROTATION: f64 = 8.0 * std::f64::consts::PI / 180.0;

pub fn random_rotation(rng: &mut AugmentRng) -> f64 {
    rng.uniform(-MAX_ROTATION, MAX_ROTATION)
}

/// Rotates image and labels by `angle` radians about the canvas centre
/// `(W/2, H/2)`. The canvas keeps its size; exposed pixels get the fill
/// value. Labels whose rotated centre leaves the canvas are dropped.
pub fn rotate_sample(sample: &Sample, angle: f64) -> Result<Sample> {
    if !angle.is_finite() || angle.abs() > MAX_ROTATION + 1e-12 {
        return Err(Error::Contract(format!(
            "rotation {angle} rad outside [-{MAX_ROTATION}, {MAX_ROTATION}]"
        )));
    }
    let img = &sample.image;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let (ox, oy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (s, c) = angle.sin_cos();

    let mut out = RasterImage::filled(w, h, ch, FILL_VALUE)?;
    let src = img.samples();
    let fetch = |x: i64, y: i64, k: usize| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            FILL_VALUE as f64
        } else {
            src[img.index(y as usize, x as usize) + k] as f64
        }
    };
    let dst = out.samples_mut();
    for row in 0..h {
        for col in 0..w {
            // inverse-map the output pixel centre into the source
            let (dx, dy) = (col as f64 + 0.5 - ox, row as f64 + 0.5 - oy);
            let sx = ox + c * dx + s * dy - 0.5;
            let sy = oy - s * dx + c * dy - 0.5;
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            let base = (row * w + col) * ch;
            for k in 0..ch {
                let top = fetch(x0, y0, k) * (1.0 - fx) + fetch(x0 + 1, y0, k) * fx;
                let bottom = fetch(x0, y0 + 1, k) * (1.0 - fx) + fetch(x0 + 1, y0 + 1, k) * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                dst[base + k] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }

    let mut labels = Vec::with_capacity(sample.labels.len());
    for gt in &sample.labels {
        let b = gt.bbox;
        let (dx, dy) = (b.cx() - ox, b.cy() - oy);
        let (cx, cy) = (ox + c * dx - s * dy, oy + s * dx + c * dy);
        if !(0.0..w as f64).contains(&cx) || !(0.0..h as f64).contains(&cy) {
            continue;
        }
        let bbox = OrientedBox::new(cx, cy, b.w(), b.h(), b.theta() + angle)?;
        labels.push(GroundTruthBox { bbox, class: gt.class });
    }
    Ok(Sample { image: out, labels })
}
