use super::{AugmentRng, Sample, FILL_VALUE};
use crate::error::{Error, Result};
use crate::eval::GroundTruthBox;
use crate::imagery::RasterImage;

/// Four-image mosaic with a random join point in the central half of an
/// `out_size` x `out_size` canvas.
pub fn mosaic(samples: &[Sample; 4], out_size: usize, rng: &mut AugmentRng) -> Result<Sample> {
    let lo = out_size / 4;
    let hi = (3 * out_size / 4).max(lo + 1);
    let jx = rng.uniform_usize(lo, hi);
    let jy = rng.uniform_usize(lo, hi);
    mosaic_at(samples, out_size, (jx, jy))
}

/// Mosaic with an explicit join point. Inputs go top-left, top-right,
/// bottom-left, bottom-right; each touches the join with its inner corner
/// and is cropped by the canvas. Labels are kept when their centre is on
/// the canvas.
pub fn mosaic_at(samples: &[Sample; 4], out_size: usize, join: (usize, usize)) -> Result<Sample> {
    let ch = samples[0].image.channels();
    if samples.iter().any(|s| s.image.channels() != ch) {
        return Err(Error::Contract("mosaic inputs must share a channel count".into()));
    }
    if out_size == 0 || join.0 > out_size || join.1 > out_size {
        return Err(Error::Contract(format!("join {join:?} outside a {out_size} canvas")));
    }
    let (jx, jy) = (join.0 as i64, join.1 as i64);
    let mut canvas = RasterImage::filled(out_size, out_size, ch, FILL_VALUE)?;
    let mut labels = Vec::new();
    for (q, s) in samples.iter().enumerate() {
        let (w, h) = (s.image.width() as i64, s.image.height() as i64);
        let (ox, oy) = match q {
            0 => (jx - w, jy - h),
            1 => (jx, jy - h),
            2 => (jx - w, jy),
            _ => (jx, jy),
        };
        blit(&mut canvas, &s.image, ox, oy);
        for gt in &s.labels {
            let bbox = gt.bbox.translated(ox as f64, oy as f64);
            let inside = |v: f64| (0.0..out_size as f64).contains(&v);
            if inside(bbox.cx()) && inside(bbox.cy()) {
                labels.push(GroundTruthBox { bbox, class: gt.class });
            }
        }
    }
    Ok(Sample { image: canvas, labels })
}

fn blit(canvas: &mut RasterImage, src: &RasterImage, ox: i64, oy: i64) {
    let (cw, chh) = (canvas.width() as i64, canvas.height() as i64);
    let ch = src.channels();
    let x0 = ox.max(0);
    let x1 = (ox + src.width() as i64).min(cw);
    if x0 >= x1 {
        return;
    }
    let len = (x1 - x0) as usize * ch;
    for y in oy.max(0)..(oy + src.height() as i64).min(chh) {
        let s = src.index((y - oy) as usize, (x0 - ox) as usize);
        let d = canvas.index(y as usize, x0 as usize);
        canvas.samples_mut()[d..d + len].copy_from_slice(&src.samples()[s..s + len]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obb::OrientedBox;
    use crate::pipeline::CrosswalkClass;

    fn sample(size: usize, value: u8, label_at: Option<(f64, f64)>) -> Sample {
        let image = RasterImage::filled(size, size, 1, value).unwrap();
        let labels = label_at
            .map(|(x, y)| GroundTruthBox {
                bbox: OrientedBox::new(x, y, 6.0, 3.0, 0.2).unwrap(),
                class: CrosswalkClass::ParallelLines,
            })
            .into_iter()
            .collect();
        Sample::new(image, labels)
    }

    #[test]
    fn blank_inputs_give_blank_canvas() {
        let blank = sample(64, 0, None);
        let out = mosaic(&[blank.clone(), blank.clone(), blank.clone(), blank], 64, &mut AugmentRng::new(1)).unwrap();
        assert!(out.labels.is_empty());
        assert!(out.image.samples().iter().all(|&v| v == 0));
    }

    #[test]
    fn centred_join_quadrant_offsets() {
        // 32x32 inputs with a label at their centre, 64 canvas, join (32, 32)
        let s: [Sample; 4] = std::array::from_fn(|i| sample(32, 10 * (i as u8 + 1), Some((16.0, 16.0))));
        let out = mosaic_at(&s, 64, (32, 32)).unwrap();
        let centres: Vec<(f64, f64)> = out.labels.iter().map(|g| (g.bbox.cx(), g.bbox.cy())).collect();
        assert_eq!(centres, vec![(16.0, 16.0), (48.0, 16.0), (16.0, 48.0), (48.0, 48.0)]);
        let px = |x: usize, y: usize| out.image.samples()[y * 64 + x];
        assert_eq!((px(0, 0), px(63, 0), px(0, 63), px(63, 63)), (10, 20, 30, 40));
        assert_eq!((px(31, 31), px(32, 31), px(31, 32), px(32, 32)), (10, 20, 30, 40));
    }

    #[test]
    fn off_centre_join_crops_and_drops() {
        let s: [Sample; 4] = std::array::from_fn(|_| sample(40, 200, Some((5.0, 5.0))));
        let out = mosaic_at(&s, 64, (20, 44)).unwrap();
        // TL offset (-20, 4): label at (-15, 9) leaves; TR at (25, 9); BL at (-15, 49) leaves; BR at (25, 49)
        let centres: Vec<(f64, f64)> = out.labels.iter().map(|g| (g.bbox.cx(), g.bbox.cy())).collect();
        assert_eq!(centres, vec![(25.0, 9.0), (25.0, 49.0)]);
        // TL leaves a strip above row 4 unfilled
        assert_eq!(out.image.samples()[0], FILL_VALUE);
        assert_eq!(out.image.samples()[4 * 64], 200);
    }

    #[test]
    fn labels_stay_on_canvas() {
        let mut rng = AugmentRng::new(42);
        for _ in 0..50 {
            let s: [Sample; 4] = std::array::from_fn(|i| {
                let size = 20 + 13 * i;
                sample(size, 1, Some((rng.uniform(0.0, size as f64), rng.uniform(0.0, size as f64))))
            });
            let out = mosaic(&s, 80, &mut rng).unwrap();
            for g in &out.labels {
                assert!((0.0..80.0).contains(&g.bbox.cx()) && (0.0..80.0).contains(&g.bbox.cy()));
            }
        }
    }

    #[test]
    fn seeded_output_repeats() {
        let s: [Sample; 4] = std::array::from_fn(|i| sample(50, 30 * i as u8, Some((25.0, 25.0))));
        let a = mosaic(&s, 96, &mut AugmentRng::new(5)).unwrap();
        let b = mosaic(&s, 96, &mut AugmentRng::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn channel_mismatch() {
        let g = sample(8, 0, None);
        let rgb = Sample::new(RasterImage::filled(8, 8, 3, 0).unwrap(), vec![]);
        assert!(mosaic_at(&[g.clone(), g.clone(), g, rgb], 16, (8, 8)).is_err());
    }
}
