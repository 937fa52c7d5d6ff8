use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::grad::batch_grad;
use super::{Dataset, LossSpec, OptimizerState};
use crate::hybrid::HybridModel;
use crate::par;
use crate::prelude::*;
use crate::rng;
use crate::{Error, Result};

/// Gaussian perturbation of every head value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub readout_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            readout_sigma: 0.01,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            readout_sigma: 0.0,
            seed: 0,
        }
    }

    fn draw(&self, label: u64, counter: u64, width: usize) -> Vec<f64> {
        if self.readout_sigma == 0.0 {
            return Vec::new();
        }
        let normal = Normal::new(0.0, self.readout_sigma).expect("sigma validated");
        let mut r = rng::stream(self.seed, label, counter);
        (0..width).map(|_| normal.sample(&mut r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    /// Seeds the per-epoch shuffles.
    pub seed: u64,
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn final_train_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.train_loss)
    }
}

fn counter(epoch: usize, i: usize) -> u64 {
    ((epoch as u64) << 32) | i as u64
}

/// Full-set loss, with evaluation noise drawn per `(epoch, sample)`.
fn evaluate(
    model: &HybridModel,
    params: &[f64],
    data: &Dataset,
    loss: &LossSpec<'_>,
    noise: &NoiseSpec,
    epoch: usize,
) -> Result<f64> {
    let n = data.len();
    let width = model.quantum.output_width();
    let parts = par::map_range(n, |i| {
        let nz = noise.draw(rng::label::EVAL_NOISE, counter(epoch, i), width);
        let y = model.forward_traced(&data.inputs[i], params, &nz)?.output;
        Ok::<f64, Error>(loss.sample(&data.inputs[i], &y, &data.targets[i], n).0)
    });
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// Mini-batch training. Batches are reshuffled every epoch from
/// `cfg.seed`; sample gradients are computed in parallel and summed in a
/// fixed order, so a run is bit-reproducible. Each epoch ends with a full
/// evaluation of the train and test loss. `clock` returns elapsed
/// milliseconds and is only recorded, never used in the numerics.
#[allow(clippy::too_many_arguments)]
pub fn train_model(
    model: &HybridModel,
    mut params: Vec<f64>,
    train: &Dataset,
    test: &Dataset,
    loss: &LossSpec<'_>,
    opt: &mut OptimizerState,
    cfg: &TrainConfig,
    clock: &dyn Fn() -> f64,
) -> Result<(Vec<f64>, TrainTrace)> {
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    if !(cfg.noise.readout_sigma >= 0.0 && cfg.noise.readout_sigma.is_finite()) {
        return Err(Error::Config("readout sigma must be finite and nonnegative".into()));
    }
    if params.len() != model.n_params() {
        return Err(Error::shape("model parameters", model.n_params(), params.len()));
    }
    let mut trace = TrainTrace::default();
    if cfg.epochs == 0 {
        return Ok((params, trace));
    }
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let width = model.quantum.output_width();
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::stream(cfg.seed, rng::label::SHUFFLE, epoch as u64));
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let noise: Vec<Vec<f64>> = batch
                .iter()
                .enumerate()
                .map(|(k, _)| {
                    cfg.noise
                        .draw(rng::label::NOISE, counter(epoch, b * cfg.batch_size + k), width)
                })
                .collect();
            let (_, grad) = batch_grad(model, &params, train, batch, &noise, loss, true)?;
            opt.step(&mut params, &grad)?;
        }
        let train_loss = evaluate(model, &params, train, loss, &cfg.noise, epoch)?;
        let test_loss = if test.is_empty() {
            None
        } else {
            Some(evaluate(model, &params, test, loss, &cfg.noise, epoch)?)
        };
        if !train_loss.is_finite() || test_loss.is_some_and(|t| !t.is_finite()) {
            let last = trace.records.last().map_or(f64::NAN, |r| r.train_loss);
            return Err(Error::Divergence(format!(
                "non-finite loss at epoch {epoch} (previous train loss {last})"
            )));
        }
        trace.records.push(EpochRecord {
            epoch,
            train_loss,
            test_loss,
            wall_ms: clock(),
        });
    }
    Ok((params, trace))
}
