use alloc::collections::BTreeSet;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::kernel::{gradient_features, value_features, KernelNet, PreMap};
use crate::hybrid::{HybridModel, ModelConfig};
use crate::prelude::*;
use crate::rng;
use crate::sph::{correction_matrix, KernelSpec, NeighborList, ParticleSet, Vec2};
use crate::train::{train_model, Dataset, LossSpec, OptimizerKind, OptimizerState, TrainConfig, TrainTrace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueSample {
    pub r: Vec2,
    pub dv: f64,
    /// `ω_ij ΔV_j`.
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradSample {
    pub r: Vec2,
    pub dv: f64,
    /// `∇ω_ij ΔV_j`, or `L_i⁻¹ ∇ω_ij ΔV_j` when corrected.
    pub target: Vec2,
}

/// Pair geometry with classical kernel weights as targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDataset {
    pub value: Vec<ValueSample>,
    pub grad: Vec<GradSample>,
    pub corrected: bool,
    pub h: f64,
    pub dv_max: f64,
    pub seed: u64,
}

fn quantize(v: f64, unit: f64) -> i64 {
    (v / unit * 1e9).round() as i64
}

/// One sample per pair `(i, j)` with `i` interior, plus a self sample
/// (`r = 0`) per interior particle in the value set. Value samples are
/// merged by `(|r|, ΔV)` since the value weight is radial; gradient samples
/// are merged only when `(r, ΔV)` coincide. `max_samples` caps each set by
/// a seeded draw that keeps the original order; self samples are exempt
/// from the value cap.
pub fn generate_kernel_dataset(
    ps: &ParticleSet,
    k: &KernelSpec,
    nl: &NeighborList,
    corrected: bool,
    max_samples: Option<usize>,
    seed: u64,
) -> Result<KernelDataset> {
    let interior = ps.interior_indices();
    if interior.iter().all(|&i| nl.of(i).is_empty()) {
        return Err(Error::EmptyDataset);
    }
    let mut value = Vec::new();
    let mut grad = Vec::new();
    let mut seen_v = BTreeSet::new();
    let mut seen_g = BTreeSet::new();
    let unit = k.h;
    for &i in &interior {
        let corr = if corrected {
            Some(correction_matrix(ps, k, nl, i)?)
        } else {
            None
        };
        let self_dv = ps.volumes[i];
        if seen_v.insert((0, quantize(self_dv, 1.0))) {
            value.push(ValueSample {
                r: [0.0, 0.0],
                dv: self_dv,
                target: k.w(0.0) * self_dv,
            });
        }
        for nb in nl.of(i) {
            let dv = ps.volumes[nb.j];
            if seen_v.insert((quantize(nb.dist, unit), quantize(dv, 1.0))) {
                value.push(ValueSample {
                    r: nb.r,
                    dv,
                    target: k.w_r(nb.dist) * dv,
                });
            }
            let Ok(dw) = k.grad(nb.r) else { continue };
            if seen_g.insert((quantize(nb.r[0], unit), quantize(nb.r[1], unit), quantize(dv, 1.0))) {
                let g = [dw[0] * dv, dw[1] * dv];
                grad.push(GradSample {
                    r: nb.r,
                    dv,
                    target: corr.map_or(g, |c| c.apply(g)),
                });
            }
        }
    }
    if let Some(cap) = max_samples {
        // self samples are the only data at r = 0, so they always survive
        let (mut kept, pairs): (Vec<_>, Vec<_>) = value.into_iter().partition(|s| s.r == [0.0, 0.0]);
        let room = cap.saturating_sub(kept.len());
        kept.extend(subsample(pairs, room, seed, 0));
        value = kept;
        grad = subsample(grad, cap, seed, 1);
    }
    if value.iter().any(|s| !s.target.is_finite()) || grad.iter().any(|s| !s.target.iter().all(|v| v.is_finite())) {
        return Err(Error::Config("non-finite kernel target".into()));
    }
    Ok(KernelDataset {
        value,
        grad,
        corrected,
        h: k.h,
        dv_max: ps.max_volume(),
        seed,
    })
}

fn subsample<T: Copy>(v: Vec<T>, cap: usize, seed: u64, which: u64) -> Vec<T> {
    if v.len() <= cap {
        return v;
    }
    let mut idx = index::sample(&mut rng::stream(seed, rng::label::SUBSAMPLE, which), v.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| v[i]).collect()
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    let m = it.fold(0.0f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Radial component `g·r̂` of a gradient target.
fn radial(s: &GradSample) -> f64 {
    let d = s.r[0].hypot(s.r[1]);
    (s.target[0] * s.r[0] + s.target[1] * s.r[1]) / d
}

impl KernelDataset {
    /// Normalized value set and the scale that maps network output back to
    /// weights.
    pub fn value_set(&self) -> Result<(Dataset, f64)> {
        if self.value.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let scale = max_abs(self.value.iter().map(|s| s.target));
        let inputs = self.value.iter().map(|s| value_features(s.r, s.dv, self.h, self.dv_max)).collect();
        let targets = self.value.iter().map(|s| vec![s.target / scale]).collect();
        Ok((Dataset::new(inputs, targets)?, scale))
    }

    /// Normalized gradient set for `pre_map`. Radial maps train on `g·r̂`.
    pub fn grad_set(&self, pre_map: PreMap) -> Result<(Dataset, f64)> {
        if self.grad.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let inputs = self.grad.iter().map(|s| gradient_features(pre_map, s.r, s.dv, self.h, self.dv_max)).collect();
        let (targets, scale) = match pre_map {
            PreMap::Identity => {
                let scale = max_abs(self.grad.iter().flat_map(|s| s.target));
                (self.grad.iter().map(|s| vec![s.target[0] / scale, s.target[1] / scale]).collect(), scale)
            }
            _ => {
                let scale = max_abs(self.grad.iter().map(radial));
                (self.grad.iter().map(|s| vec![radial(s) / scale]).collect(), scale)
            }
        };
        Ok((Dataset::new(inputs, targets)?, scale))
    }
}

/// How to fit one kernel network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFitConfig {
    /// Architecture; inputs, outputs and bounds are overwritten.
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    /// Fraction held out for the per-epoch test loss.
    pub test_fraction: f64,
}

/// Result of [`fit_kernel_net`].
#[derive(Debug, Clone, PartialEq)]
pub struct FittedNet {
    pub net: KernelNet,
    pub trace: TrainTrace,
}

/// Trains a network on a normalized kernel set produced by
/// [`KernelDataset::value_set`] or [`KernelDataset::grad_set`].
pub fn fit_kernel_net(data: &Dataset, scale: f64, cfg: &KernelFitConfig, clock: &dyn Fn() -> f64) -> Result<FittedNet> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut mc = cfg.model.clone();
    mc.n_inputs = data.inputs[0].len();
    mc.n_outputs = data.targets[0].len();
    mc.input_bounds = vec![(0.0, 1.0); mc.n_inputs];
    let model = HybridModel::build(&mc)?;
    let (train, test) = if cfg.test_fraction > 0.0 {
        let (test, train) = data.split(cfg.test_fraction, cfg.train.seed);
        (train, test)
    } else {
        (data.clone(), Dataset::default())
    };
    let mut opt = OptimizerState::new(cfg.optimizer, cfg.lr, model.n_params());
    let init = model.init_params();
    let (params, trace) = train_model(&model, init, &train, &test, &LossSpec::default(), &mut opt, &cfg.train, clock)?;
    Ok(FittedNet {
        net: KernelNet { model, params, scale },
        trace,
    })
}
