use super::tensor::Tensor4;
use super::weights::ConvWeights;
use crate::error::{Error, Result};

/// Exponentially weighted mean `sum(e^x * x) / sum(e^x)`, evaluated relative
/// to the maximum so it never overflows. Constants map to themselves exactly
/// and the result always lies in `[min, max]` of the inputs.
pub fn soft_pool_weighted(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (lo, hi) = values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (mut num, mut den) = (0.0, 0.0);
    for v in values {
        let d = v - hi;
        let weight = d.exp();
        num += weight * d;
        den += weight;
    }
    (hi + num / den).clamp(lo, hi)
}

/// Literal `sum(e^x * x) / sum(e^x)`; overflows for large inputs.
pub fn soft_pool_naive(values: &[f64]) -> f64 {
    let num: f64 = values.iter().map(|v| v.exp() * v).sum();
    let den: f64 = values.iter().map(|v| v.exp()).sum();
    num / den
}

fn check_kernel(kernel: usize) -> Result<()> {
    if kernel == 0 || kernel % 2 == 0 {
        return Err(Error::Shape(format!("pooling kernel must be odd, got {kernel}")));
    }
    Ok(())
}

/// Stride-1 "same" pooling with windows clipped at the borders.
fn pool2d(x: &Tensor4, kernel: usize, reduce: impl Fn(&mut dyn Iterator<Item = f64>) -> f64) -> Tensor4 {
    let r = kernel / 2;
    let (h, w) = (x.h(), x.w());
    Tensor4::from_fn(x.shape(), |n, c, y, xx| {
        let plane = x.plane(n, c);
        let (y0, y1) = (y.saturating_sub(r), (y + r).min(h - 1));
        let (x0, x1) = (xx.saturating_sub(r), (xx + r).min(w - 1));
        let mut window = (y0..=y1).flat_map(|yy| plane[yy * w + x0..=yy * w + x1].iter().copied());
        reduce(&mut window)
    })
}

pub fn max_pool2d(x: &Tensor4, kernel: usize) -> Result<Tensor4> {
    check_kernel(kernel)?;
    Ok(pool2d(x, kernel, &|it: &mut dyn Iterator<Item = f64>| {
        it.fold(f64::NEG_INFINITY, f64::max)
    }))
}

pub fn soft_pool2d(x: &Tensor4, kernel: usize) -> Result<Tensor4> {
    check_kernel(kernel)?;
    let r = kernel / 2;
    let (h, w) = (x.h(), x.w());
    Ok(Tensor4::from_fn(x.shape(), |n, c, y, xx| {
        let plane = x.plane(n, c);
        let (y0, y1) = (y.saturating_sub(r), (y + r).min(h - 1));
        let (x0, x1) = (xx.saturating_sub(r), (xx + r).min(w - 1));
        soft_pool_weighted((y0..=y1).flat_map(move |yy| plane[yy * w + x0..=yy * w + x1].iter().copied()))
    }))
}

/// Per-channel soft-pool over the whole spatial plane; shape `(n, c, 1, 1)`.
pub fn global_soft_pool(x: &Tensor4) -> Tensor4 {
    Tensor4::from_fn([x.n(), x.c(), 1, 1], |n, c, _, _| {
        soft_pool_weighted(x.plane(n, c).iter().copied())
    })
}

/// Per-channel maximum over the whole spatial plane; shape `(n, c, 1, 1)`.
pub fn global_max_pool(x: &Tensor4) -> Tensor4 {
    Tensor4::from_fn([x.n(), x.c(), 1, 1], |n, c, _, _| {
        x.plane(n, c).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Soft-pool across channels at each position; shape `(n, 1, h, w)`.
pub fn channel_softpool(x: &Tensor4) -> Tensor4 {
    Tensor4::from_fn([x.n(), 1, x.h(), x.w()], |n, _, y, xx| {
        soft_pool_weighted((0..x.c()).map(|c| x.get(n, c, y, xx)))
    })
}

/// Maximum across channels at each position; shape `(n, 1, h, w)`.
pub fn channel_max(x: &Tensor4) -> Tensor4 {
    Tensor4::from_fn([x.n(), 1, x.h(), x.w()], |n, _, y, xx| {
        (0..x.c()).map(|c| x.get(n, c, y, xx)).fold(f64::NEG_INFINITY, f64::max)
    })
}

pub fn conv2d(x: &Tensor4, weights: &ConvWeights) -> Result<Tensor4> {
    conv2d_strided(x, weights, 1)
}

/// Zero-padded cross-correlation plus bias; padding `kernel / 2`.
pub fn conv2d_strided(x: &Tensor4, weights: &ConvWeights, stride: usize) -> Result<Tensor4> {
    if x.c() != weights.in_channels() {
        return Err(Error::Shape(format!(
            "conv expects {} input channels, tensor has {}",
            weights.in_channels(),
            x.c()
        )));
    }
    if stride == 0 {
        return Err(Error::Shape("conv stride must be >= 1".into()));
    }
    let k = weights.kernel();
    let pad = (k / 2) as isize;
    let (h, w) = (x.h() as isize, x.w() as isize);
    let oh = ((x.h() + 2 * (k / 2) - k) / stride) + 1;
    let ow = ((x.w() + 2 * (k / 2) - k) / stride) + 1;
    let mut out = vec![0.0; x.n() * weights.out_channels() * oh * ow];

    // accumulate one (output channel, input channel, tap) plane at a time
    for n in 0..x.n() {
        for o in 0..weights.out_channels() {
            let base = (n * weights.out_channels() + o) * oh * ow;
            let acc = &mut out[base..base + oh * ow];
            acc.fill(weights.bias()[o]);
            for i in 0..x.c() {
                let plane = x.plane(n, i);
                for ky in 0..k {
                    for kx in 0..k {
                        let wv = weights.weight(o, i, ky, kx);
                        if wv == 0.0 {
                            continue;
                        }
                        for oy in 0..oh {
                            let iy = (oy * stride) as isize + ky as isize - pad;
                            if iy < 0 || iy >= h {
                                continue;
                            }
                            let row = &plane[iy as usize * x.w()..(iy as usize + 1) * x.w()];
                            for ox in 0..ow {
                                let ix = (ox * stride) as isize + kx as isize - pad;
                                if ix >= 0 && ix < w {
                                    acc[oy * ow + ox] += wv * row[ix as usize];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor4::new([x.n(), weights.out_channels(), oh, ow], out)
}

/// Stacks tensors along the channel axis in argument order.
pub fn concat_channels(parts: &[&Tensor4]) -> Result<Tensor4> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Shape("concat needs at least one tensor".into()))?;
    let (n, h, w) = (first.n(), first.h(), first.w());
    if let Some(bad) = parts.iter().find(|p| (p.n(), p.h(), p.w()) != (n, h, w)) {
        return Err(Error::Shape(format!(
            "concat of {:?} with {:?}: n/h/w differ",
            first.shape(),
            bad.shape()
        )));
    }
    let total_c: usize = parts.iter().map(|p| p.c()).sum();
    let plane = h * w;
    let mut data = Vec::with_capacity(n * total_c * plane);
    for b in 0..n {
        for p in parts {
            let start = p.offset(b, 0, 0, 0);
            data.extend_from_slice(&p.data()[start..start + p.c() * plane]);
        }
    }
    Tensor4::new([n, total_c, h, w], data)
}

/// Logistic function, kept strictly inside `(0, 1)`.
pub fn sigmoid(v: f64) -> f64 {
    let s = if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

pub fn relu(v: f64) -> f64 {
    v.max(0.0)
}
