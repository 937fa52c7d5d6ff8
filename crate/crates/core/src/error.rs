use crate::prelude::*;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("qubit count {0} outside the supported range 1..=20")]
    Capacity(usize),
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("qubit index {index} out of range for a {n_qubits}-qubit state")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("degenerate encoding: feature vector has zero norm")]
    DegenerateEncoding,
    #[error("loss is undefined on an empty sample set")]
    EmptyLoss,
    #[error("parameter slot {0} is not a quantum angle slot")]
    NotQuantumSlot(usize),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("kernel gradient is undefined for a zero displacement")]
    ZeroDisplacement,
    #[error("degenerate stencil at particle {0}: correction matrix is singular")]
    DegenerateStencil(usize),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("integration failure at step {step}: non-finite field value")]
    IntegrationFailure { step: usize },
    #[error("relative error undefined: reference has zero norm")]
    ZeroReference,
}

impl Error {
    pub(crate) fn shape(context: &'static str, expected: usize, got: usize) -> Self {
        Error::Shape {
            context,
            expected,
            got,
        }
    }

    /// True for errors caused by a numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence(_)
                | Error::IntegrationFailure { .. }
                | Error::DegenerateStencil(_)
                | Error::ZeroReference
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
