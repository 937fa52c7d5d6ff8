use serde::{Deserialize, Serialize};

use crate::prelude::*;
use crate::qsim::{expectation_z, StateVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadKind {
    PauliZ,
    Probability,
}

/// Readout of a subset of qubits.
///
/// `Probability` returns the marginal distribution over `qubits`; bit `m`
/// of the outcome index is `qubits[m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementHead {
    pub kind: HeadKind,
    pub qubits: Vec<usize>,
}

impl MeasurementHead {
    pub fn width(&self) -> usize {
        match self.kind {
            HeadKind::PauliZ => self.qubits.len(),
            HeadKind::Probability => 1 << self.qubits.len(),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::Config("measurement head reads no qubits".into()));
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::QubitIndex { index: q, n_qubits });
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::Config(format!("qubit {q} measured twice")));
            }
        }
        Ok(())
    }

    pub fn readout(&self, state: &StateVector) -> Result<Vec<f64>> {
        match self.kind {
            HeadKind::PauliZ => self
                .qubits
                .iter()
                .map(|&q| expectation_z(state, q))
                .collect(),
            HeadKind::Probability => state.marginal_probabilities(&self.qubits),
        }
    }

    /// Diagonal of `Σ_k g_k O_k` in the computational basis, where `O_k` is
    /// the observable behind output `k`. Every head output is `⟨ψ|O_k|ψ⟩`
    /// with diagonal `O_k`.
    pub(crate) fn weighted_diagonal(&self, n_qubits: usize, g: &[f64]) -> Vec<f64> {
        (0..1usize << n_qubits)
            .map(|b| match self.kind {
                HeadKind::PauliZ => self
                    .qubits
                    .iter()
                    .zip(g)
                    .map(|(&q, gk)| if b >> q & 1 == 0 { *gk } else { -gk })
                    .sum(),
                HeadKind::Probability => {
                    let k = self
                        .qubits
                        .iter()
                        .enumerate()
                        .fold(0, |acc, (m, &q)| acc | ((b >> q & 1) << m));
                    g[k]
                }
            })
            .collect()
    }
}
