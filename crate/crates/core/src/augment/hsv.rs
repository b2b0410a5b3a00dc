use super::AugmentRng;
use crate::error::{Error, Result};
use crate::imagery::RasterImage;

/// Maximum jitter per component, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvGains {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl HsvGains {
    pub fn zero() -> Self {
        Self { h: 0.0, s: 0.0, v: 0.0 }
    }
}

/// Concrete adjustment: hue shift in turns, saturation and value multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvFactors {
    pub hue_shift: f64,
    pub sat_scale: f64,
    pub val_scale: f64,
}

impl HsvFactors {
    pub fn identity() -> Self {
        Self { hue_shift: 0.0, sat_scale: 1.0, val_scale: 1.0 }
    }
}

/// Draws one set of factors for the whole image and applies it.
pub fn hsv_jitter(image: &RasterImage, gains: HsvGains, rng: &mut AugmentRng) -> Result<RasterImage> {
    for g in [gains.h, gains.s, gains.v] {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::Contract(format!("HSV gain {g} outside [0, 1]")));
        }
    }
    let factors = HsvFactors {
        hue_shift: rng.uniform(-gains.h, gains.h),
        sat_scale: rng.uniform(1.0 - gains.s, 1.0 + gains.s),
        val_scale: rng.uniform(1.0 - gains.v, 1.0 + gains.v),
    };
    hsv_adjust(image, factors)
}

pub fn hsv_adjust(image: &RasterImage, f: HsvFactors) -> Result<RasterImage> {
    if image.channels() != 3 {
        return Err(Error::Unsupported("HSV adjustment needs an RGB image".into()));
    }
    let mut out = image.clone();
    for px in out.samples_mut().chunks_exact_mut(3) {
        let (h, s, v) = rgb_to_hsv(px[0], px[1], px[2]);
        let h = (h + f.hue_shift).rem_euclid(1.0);
        let s = (s * f.sat_scale).clamp(0.0, 1.0);
        let v = (v * f.val_scale).clamp(0.0, 1.0);
        let (r, g, b) = hsv_to_rgb(h, s, v);
        px[0] = to_u8(r);
        px[1] = to_u8(g);
        px[2] = to_u8(b);
    }
    Ok(out)
}

fn to_u8(x: f64) -> u8 {
    (x * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Hexcone model; hue in turns `[0, 1)`.
fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / delta).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / delta + 2.0) / 6.0
    } else {
        ((r - g) / delta + 4.0) / 6.0
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    (h, s, max)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let h6 = (h * 6.0).rem_euclid(6.0);
    let sector = h6.floor();
    let frac = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * frac);
    let t = v * (1.0 - s * (1.0 - frac));
    match sector as u32 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    }
}
