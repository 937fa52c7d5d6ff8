use serde::{Deserialize, Serialize};

use crate::prelude::*;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// `‖p − r‖₂ / ‖r‖₂` over the masked points.
    pub l2_rel: f64,
    /// `max|p − r| / max|r|` over the masked points.
    pub linf_rel: f64,
    /// `p − r` at every point, masked or not.
    pub pointwise: Vec<f64>,
}

/// Relative errors of `pred` against `reference`, restricted to points
/// where `mask` is true (all points when `None`).
pub fn error_metrics(pred: &[f64], reference: &[f64], mask: Option<&[bool]>) -> Result<ErrorMetrics> {
    if pred.len() != reference.len() {
        return Err(Error::shape("prediction length", reference.len(), pred.len()));
    }
    if let Some(m) = mask {
        if m.len() != pred.len() {
            return Err(Error::shape("mask length", pred.len(), m.len()));
        }
    }
    let pointwise: Vec<f64> = pred.iter().zip(reference).map(|(p, r)| p - r).collect();
    let (mut num, mut den, mut emax, mut rmax) = (0.0, 0.0, 0.0f64, 0.0f64);
    for (k, (&e, &r)) in pointwise.iter().zip(reference).enumerate() {
        if mask.is_some_and(|m| !m[k]) {
            continue;
        }
        num += e * e;
        den += r * r;
        emax = emax.max(e.abs());
        rmax = rmax.max(r.abs());
    }
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(ErrorMetrics {
        l2_rel: (num / den).sqrt(),
        linf_rel: emax / rmax,
        pointwise,
    })
}
