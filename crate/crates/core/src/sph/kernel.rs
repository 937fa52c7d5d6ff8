use serde::{Deserialize, Serialize};

use super::Vec2;
use crate::prelude::*;
use crate::{Error, Result};

/// Quintic (Wendland C2) kernel `ω(q) = α_D (1 − q/2)⁴ (2q + 1)` on
/// `0 ≤ q ≤ 2`, `q = |r|/h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub h: f64,
    pub dim: u8,
}

impl KernelSpec {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("smoothing length must be positive, got {h}")));
        }
        Ok(KernelSpec { h, dim: 2 })
    }

    pub fn alpha_d(&self) -> f64 {
        use core::f64::consts::PI;
        match self.dim {
            3 => 21.0 / (16.0 * PI * self.h.powi(3)),
            _ => 7.0 / (4.0 * PI * self.h * self.h),
        }
    }

    pub fn support(&self) -> f64 {
        2.0 * self.h
    }

    /// `ω(q)`.
    pub fn w(&self, q: f64) -> f64 {
        if !(0.0..2.0).contains(&q) {
            return 0.0;
        }
        let a = 1.0 - 0.5 * q;
        self.alpha_d() * a.powi(4) * (2.0 * q + 1.0)
    }

    /// `dω/dq`.
    pub fn dw_dq(&self, q: f64) -> f64 {
        if !(0.0..2.0).contains(&q) {
            return 0.0;
        }
        let a = 1.0 - 0.5 * q;
        self.alpha_d() * (-2.0 * a.powi(3) * (2.0 * q + 1.0) + 2.0 * a.powi(4))
    }

    /// `ω(|r|/h)`.
    pub fn w_r(&self, dist: f64) -> f64 {
        self.w(dist / self.h)
    }

    /// `∇ω` for the displacement `r = x_i − x_j`.
    pub fn grad(&self, r: Vec2) -> Result<Vec2> {
        let d = (r[0] * r[0] + r[1] * r[1]).sqrt();
        if d == 0.0 {
            return Err(Error::ZeroDisplacement);
        }
        let s = self.dw_dq(d / self.h) / (self.h * d);
        Ok([s * r[0], s * r[1]])
    }
}
