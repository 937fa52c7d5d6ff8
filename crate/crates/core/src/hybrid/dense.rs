use serde::{Deserialize, Serialize};

use crate::prelude::*;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    ReLU,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::ReLU => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::ReLU => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Shape of a dense layer; its weights live in the model's flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseSpec {
    pub rows: usize,
    pub cols: usize,
    pub activation: Activation,
}

impl DenseSpec {
    pub fn new(cols: usize, rows: usize, activation: Activation) -> Self {
        DenseSpec {
            rows,
            cols,
            activation,
        }
    }

    /// Weights plus biases.
    pub fn n_params(&self) -> usize {
        self.rows * self.cols + self.rows
    }

    /// `activation(W x + b)` with `W` row-major followed by `b` in `params`.
    pub(crate) fn forward(&self, params: &[f64], x: &[f64]) -> Vec<f64> {
        let (w, b) = params.split_at(self.rows * self.cols);
        w.chunks_exact(self.cols)
            .zip(b)
            .map(|(row, bi)| {
                let z = row.iter().zip(x).fold(*bi, |acc, (wij, xj)| acc + wij * xj);
                self.activation.apply(z)
            })
            .collect()
    }

    /// Accumulates parameter gradients into `grad` and returns `dL/dx`.
    pub(crate) fn backward(
        &self,
        params: &[f64],
        x: &[f64],
        y: &[f64],
        gy: &[f64],
        grad: &mut [f64],
    ) -> Vec<f64> {
        let nw = self.rows * self.cols;
        let w = &params[..nw];
        let mut gx = vec![0.0; self.cols];
        for r in 0..self.rows {
            let gz = gy[r] * self.activation.derivative_from_output(y[r]);
            if gz == 0.0 {
                continue;
            }
            let row = &w[r * self.cols..(r + 1) * self.cols];
            let grow = &mut grad[r * self.cols..(r + 1) * self.cols];
            for c in 0..self.cols {
                grow[c] += gz * x[c];
                gx[c] += gz * row[c];
            }
            grad[nw + r] += gz;
        }
        gx
    }
}

/// Standalone dense layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// Row-major `rows × cols`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        let rows = weights.len();
        let cols = weights.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || weights.iter().any(|r| r.len() != cols) {
            return Err(Error::Config("dense weights must be a nonempty rectangle".into()));
        }
        if bias.len() != rows {
            return Err(Error::shape("dense bias", rows, bias.len()));
        }
        Ok(DenseLayer {
            weights: weights.concat(),
            bias,
            rows,
            cols,
            activation,
        })
    }

    pub fn spec(&self) -> DenseSpec {
        DenseSpec::new(self.cols, self.rows, self.activation)
    }

    /// Flat `[weights…, bias…]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.extend_from_slice(&self.bias);
        p
    }
}

/// `activation(W x + b)`.
pub fn dense_forward(layer: &DenseLayer, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != layer.cols {
        return Err(Error::shape("dense input", layer.cols, x.len()));
    }
    Ok(layer.spec().forward(&layer.params(), x))
}
