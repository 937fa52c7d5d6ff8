use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::prelude::*;
use crate::rng;
use crate::{Error, Result};

/// Paired inputs and targets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::shape("dataset targets", inputs.len(), targets.len()));
        }
        Ok(Dataset { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            inputs: idx.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i].clone()).collect(),
        }
    }

    /// Seeded shuffle split; the first part holds `round(fraction·len)`
    /// samples.
    pub fn split(&self, fraction: f64, seed: u64) -> (Dataset, Dataset) {
        let (a, b) = self.split_indices(fraction, seed);
        (self.subset(&a), self.subset(&b))
    }

    /// Sample indices of the two parts of [`Dataset::split`].
    pub fn split_indices(&self, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut rng::stream(seed, rng::label::SPLIT, 0));
        let cut = ((self.len() as f64) * fraction).round() as usize;
        let rest = idx.split_off(cut);
        (idx, rest)
    }

    /// Per-column `(min, max)` of the inputs, widened where a column is
    /// constant so the interval is never empty.
    pub fn input_bounds(&self) -> Vec<(f64, f64)> {
        let w = self.inputs.first().map_or(0, Vec::len);
        (0..w)
            .map(|c| {
                let (lo, hi) = self
                    .inputs
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[c]), hi.max(x[c])));
                if hi > lo {
                    (lo, hi)
                } else {
                    (lo - 0.5, lo + 0.5)
                }
            })
            .collect()
    }
}
