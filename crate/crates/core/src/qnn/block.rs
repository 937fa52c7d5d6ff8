use serde::{Deserialize, Serialize};

use super::{build_ansatz, AnsatzSpec, EncoderKind, EncoderSpec, HeadKind, MeasurementHead};
use crate::prelude::*;
use crate::qsim::{CircuitSpec, StateVector};
use crate::{Error, Result};

/// Encoder, circuit and head wired together.
///
/// The circuit holds the encoding gates first (encoded slots follow the
/// trainable ones) and the ansatz after them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumBlock {
    pub encoder: EncoderSpec,
    pub ansatz: AnsatzSpec,
    pub circuit: CircuitSpec,
    pub head: MeasurementHead,
}

impl QuantumBlock {
    /// Builds the block; the head reads every active qubit.
    pub fn new(encoder: EncoderSpec, ansatz: AnsatzSpec, head: HeadKind) -> Result<Self> {
        encoder.validate()?;
        let body = build_ansatz(&ansatz)?;
        let n = ansatz.n_qubits;
        if n < encoder.min_qubits() {
            return Err(Error::Config(format!(
                "{} amplitude features need {} qubits",
                encoder.n_features,
                encoder.min_qubits()
            )));
        }
        let n_enc = encoder.n_slots(n);
        let mut circuit = CircuitSpec::new(n, body.n_trainable, n_enc);
        circuit.gates = encoder.gates(n, body.n_trainable)?;
        circuit.gates.extend(body.gates);
        circuit.active_qubits = body.active_qubits;
        let head = MeasurementHead {
            kind: head,
            qubits: circuit.active_qubits.clone(),
        };
        let block = QuantumBlock {
            encoder,
            ansatz,
            circuit,
            head,
        };
        block.validate()?;
        Ok(block)
    }

    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        self.circuit.validate()?;
        self.head.validate(self.circuit.n_qubits)?;
        if self.circuit.n_encoded != self.encoder.n_slots(self.circuit.n_qubits) {
            return Err(Error::Config("circuit encoded slots disagree with encoder".into()));
        }
        if self.head.qubits.iter().any(|q| !self.circuit.active_qubits.contains(q)) {
            return Err(Error::Config("head reads a pooled qubit".into()));
        }
        Ok(())
    }

    pub fn n_trainable(&self) -> usize {
        self.circuit.n_trainable
    }

    pub fn n_features(&self) -> usize {
        self.encoder.n_features
    }

    pub fn output_width(&self) -> usize {
        self.head.width()
    }

    /// Initial state and full `[trainable…, encoded…]` parameter vector.
    pub fn prepare(&self, trainable: &[f64], features: &[f64]) -> Result<(StateVector, Vec<f64>)> {
        if trainable.len() != self.n_trainable() {
            return Err(Error::shape("quantum parameters", self.n_trainable(), trainable.len()));
        }
        let n = self.circuit.n_qubits;
        let (state, encoded) = match self.encoder.kind {
            EncoderKind::Angle => (StateVector::zero(n)?, self.encoder.angles(features, n)?),
            EncoderKind::Amplitude => (self.encoder.amplitude_state(features, n)?, Vec::new()),
        };
        let mut params = Vec::with_capacity(self.circuit.n_params());
        params.extend_from_slice(trainable);
        params.extend(encoded);
        Ok((state, params))
    }

    /// Final state before readout.
    pub fn state(&self, trainable: &[f64], features: &[f64]) -> Result<StateVector> {
        let (mut state, params) = self.prepare(trainable, features)?;
        self.circuit.apply(&mut state, &params)?;
        Ok(state)
    }

    pub fn forward(&self, trainable: &[f64], features: &[f64]) -> Result<Vec<f64>> {
        self.head.readout(&self.state(trainable, features)?)
    }
}

/// Encode, run and read out.
pub fn quantum_forward(
    circuit: &CircuitSpec,
    head: &MeasurementHead,
    trainable: &[f64],
    features: &[f64],
    encoder: &EncoderSpec,
) -> Result<Vec<f64>> {
    let n = circuit.n_qubits;
    let (mut state, encoded) = match encoder.kind {
        EncoderKind::Angle => (StateVector::zero(n)?, encoder.angles(features, n)?),
        EncoderKind::Amplitude => (encoder.amplitude_state(features, n)?, Vec::new()),
    };
    if trainable.len() != circuit.n_trainable {
        return Err(Error::shape("quantum parameters", circuit.n_trainable, trainable.len()));
    }
    let params: Vec<f64> = trainable.iter().copied().chain(encoded).collect();
    circuit.apply(&mut state, &params)?;
    head.readout(&state)
}
