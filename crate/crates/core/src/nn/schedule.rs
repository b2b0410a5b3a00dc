use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Cosine annealing from `lr_max` at step 0 down to `lr_min` at step `total`.
///
/// Evaluated as the convex blend `c * lr_max + (1 - c) * lr_min` with
/// `c = (1 + cos(pi t / T)) / 2`, which hits both endpoints and the midpoint
/// mean exactly in floating point.
pub fn cosine_lr(step: u64, total: u64, lr_max: f64, lr_min: f64) -> Result<f64> {
    if total == 0 {
        return Err(Error::Contract("cosine schedule needs at least one step".into()));
    }
    if step > total {
        return Err(Error::Contract(format!("step {step} beyond schedule length {total}")));
    }
    if !(lr_min.is_finite() && lr_max.is_finite()) || lr_min > lr_max {
        return Err(Error::Contract(format!(
            "learning-rate bounds must satisfy lr_min <= lr_max, got {lr_min} > {lr_max}"
        )));
    }
    let blend = 0.5 * (1.0 + (PI * step as f64 / total as f64).cos());
    Ok((blend * lr_max + (1.0 - blend) * lr_min).clamp(lr_min, lr_max))
}
