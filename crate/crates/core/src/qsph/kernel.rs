use core::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::hybrid::HybridModel;
use crate::prelude::*;
use crate::sph::{CorrectionMatrix, KernelSpec, Vec2};
use crate::{Error, Result};

/// Pair weights that stand in for `ω_ij ΔV_j` and `∇ω_ij ΔV_j`.
///
/// `r` is `x_i − x_j`; `i` identifies the particle the gradient belongs to,
/// for kernels that carry a per-particle correction.
pub trait PairKernel: Sync {
    fn value_weight(&self, r: Vec2, dv: f64) -> Result<f64>;
    fn gradient_weight(&self, i: usize, r: Vec2, dv: f64) -> Result<Vec2>;

    /// Evaluations so far that had to clamp an input.
    fn clamp_count(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Correction {
    None,
    /// One matrix for every particle.
    Fixed(CorrectionMatrix),
    /// Indexed by particle; `None` entries fall back to plain weights.
    PerParticle(Vec<Option<CorrectionMatrix>>),
}

/// The classical Quintic kernel wrapped as a [`PairKernel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactKernel {
    pub kernel: KernelSpec,
    pub correction: Correction,
}

impl ExactKernel {
    pub fn plain(kernel: KernelSpec) -> Self {
        ExactKernel {
            kernel,
            correction: Correction::None,
        }
    }

    pub fn corrected(kernel: KernelSpec, corr: Vec<Option<CorrectionMatrix>>) -> Self {
        ExactKernel {
            kernel,
            correction: Correction::PerParticle(corr),
        }
    }
}

impl PairKernel for ExactKernel {
    fn value_weight(&self, r: Vec2, dv: f64) -> Result<f64> {
        Ok(self.kernel.w_r(r[0].hypot(r[1])) * dv)
    }

    fn gradient_weight(&self, i: usize, r: Vec2, dv: f64) -> Result<Vec2> {
        let Ok(dw) = self.kernel.grad(r) else {
            return Ok([0.0, 0.0]);
        };
        let g = [dw[0] * dv, dw[1] * dv];
        Ok(match &self.correction {
            Correction::None => g,
            Correction::Fixed(c) => c.apply(g),
            Correction::PerParticle(cs) => match cs.get(i) {
                Some(Some(c)) => c.apply(g),
                _ => g,
            },
        })
    }
}

/// Geometry map applied before the gradient network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PreMap {
    /// Network sees both components and returns a 2D weight.
    #[default]
    Identity,
    /// Network sees `|r|/2h` and returns `s`; the weight is `s·r̂`.
    NormDistance,
    /// Network sees `r·r/4h²` and returns `s`; the weight is `s·r̂`.
    InnerDistance,
}

impl PreMap {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" => Ok(PreMap::Identity),
            "norm" | "norm-distance" => Ok(PreMap::NormDistance),
            "inner" | "inner-distance" => Ok(PreMap::InnerDistance),
            _ => Err(Error::Config(format!("unknown pre-map `{s}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PreMap::Identity => "identity",
            PreMap::NormDistance => "norm",
            PreMap::InnerDistance => "inner",
        }
    }

    pub fn n_inputs(self) -> usize {
        match self {
            PreMap::Identity => 3,
            _ => 2,
        }
    }

    pub fn n_outputs(self) -> usize {
        match self {
            PreMap::Identity => 2,
            _ => 1,
        }
    }
}

/// Trained network plus the factor that maps its output back to weight
/// units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelNet {
    pub model: HybridModel,
    pub params: Vec<f64>,
    pub scale: f64,
}

impl KernelNet {
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.model.forward(x, &self.params)?;
        for v in &mut y {
            *v *= self.scale;
        }
        Ok(y)
    }
}

/// Normalized value-network input `[|r|/2h, ΔV/ΔV_max]`, unclamped.
pub fn value_features(r: Vec2, dv: f64, h: f64, dv_max: f64) -> Vec<f64> {
    vec![r[0].hypot(r[1]) / (2.0 * h), dv / dv_max]
}

/// Normalized gradient-network input for `pre_map`, unclamped.
pub fn gradient_features(pre_map: PreMap, r: Vec2, dv: f64, h: f64, dv_max: f64) -> Vec<f64> {
    let s = 2.0 * h;
    match pre_map {
        PreMap::Identity => vec![(r[0] / s + 1.0) / 2.0, (r[1] / s + 1.0) / 2.0, dv / dv_max],
        PreMap::NormDistance => vec![r[0].hypot(r[1]) / s, dv / dv_max],
        PreMap::InnerDistance => vec![(r[0] * r[0] + r[1] * r[1]) / (s * s), dv / dv_max],
    }
}

/// Learned pair weights. Every network input is normalized to `[0, 1]`;
/// values outside are clamped and counted in [`PairKernel::clamp_count`].
#[derive(Debug, Serialize, Deserialize)]
pub struct QuantumKernelModel {
    pub value: Option<KernelNet>,
    pub grad: Option<KernelNet>,
    pub pre_map: PreMap,
    pub h: f64,
    pub dv_max: f64,
    #[serde(skip)]
    clamps: AtomicU64,
}

impl Clone for QuantumKernelModel {
    fn clone(&self) -> Self {
        QuantumKernelModel {
            value: self.value.clone(),
            grad: self.grad.clone(),
            pre_map: self.pre_map,
            h: self.h,
            dv_max: self.dv_max,
            clamps: AtomicU64::new(self.clamps.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for QuantumKernelModel {
    fn eq(&self, o: &Self) -> bool {
        self.value == o.value && self.grad == o.grad && self.pre_map == o.pre_map && self.h == o.h && self.dv_max == o.dv_max
    }
}

impl QuantumKernelModel {
    pub fn new(value: Option<KernelNet>, grad: Option<KernelNet>, pre_map: PreMap, h: f64, dv_max: f64) -> Result<Self> {
        let m = QuantumKernelModel {
            value,
            grad,
            pre_map,
            h,
            dv_max,
            clamps: AtomicU64::new(0),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.dv_max > 0.0) {
            return Err(Error::Config("kernel model needs positive h and ΔV_max".into()));
        }
        if let Some(v) = &self.value {
            check_net(v, 2, 1, "value")?;
        }
        if let Some(g) = &self.grad {
            check_net(g, self.pre_map.n_inputs(), self.pre_map.n_outputs(), "gradient")?;
        }
        Ok(())
    }

    pub fn reset_clamps(&self) {
        self.clamps.store(0, Ordering::Relaxed);
    }

    fn clamp(&self, mut x: Vec<f64>) -> Vec<f64> {
        let mut hit = false;
        for v in &mut x {
            if !(0.0..=1.0).contains(v) {
                hit = true;
                *v = v.clamp(0.0, 1.0);
            }
        }
        if hit {
            self.clamps.fetch_add(1, Ordering::Relaxed);
        }
        x
    }
}

fn check_net(net: &KernelNet, n_in: usize, n_out: usize, what: &str) -> Result<()> {
    net.model.validate()?;
    if net.model.n_inputs != n_in || net.model.n_outputs != n_out {
        return Err(Error::Config(format!(
            "{what} network maps {} → {}, expected {n_in} → {n_out}",
            net.model.n_inputs, net.model.n_outputs
        )));
    }
    if net.params.len() != net.model.n_params() {
        return Err(Error::shape("kernel network parameters", net.model.n_params(), net.params.len()));
    }
    if !net.scale.is_finite() {
        return Err(Error::Config(format!("{what} network scale is not finite")));
    }
    Ok(())
}

impl PairKernel for QuantumKernelModel {
    fn clamp_count(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }

    fn value_weight(&self, r: Vec2, dv: f64) -> Result<f64> {
        let net = self.value.as_ref().ok_or_else(|| Error::Config("kernel model has no value network".into()))?;
        let x = self.clamp(value_features(r, dv, self.h, self.dv_max));
        Ok(net.eval(&x)?[0])
    }

    fn gradient_weight(&self, _i: usize, r: Vec2, dv: f64) -> Result<Vec2> {
        let net = self.grad.as_ref().ok_or_else(|| Error::Config("kernel model has no gradient network".into()))?;
        let x = self.clamp(gradient_features(self.pre_map, r, dv, self.h, self.dv_max));
        let y = net.eval(&x)?;
        Ok(match self.pre_map {
            PreMap::Identity => [y[0], y[1]],
            _ => {
                let d = r[0].hypot(r[1]);
                if d == 0.0 {
                    [0.0, 0.0]
                } else {
                    [y[0] * r[0] / d, y[0] * r[1] / d]
                }
            }
        })
    }
}
