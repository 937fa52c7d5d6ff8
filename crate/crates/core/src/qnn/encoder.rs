use serde::{Deserialize, Serialize};

use crate::prelude::*;
use crate::qsim::{CircuitSpec, GateKind, GateOp, StateVector, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncoderKind {
    Angle,
    Amplitude,
}

/// Classical-to-quantum data loading.
///
/// Angle encoding places `max(n_features, n_qubits)` RY rotations: slot `s`
/// rotates qubit `s mod n_qubits` by the scaled feature `s mod n_features`.
/// A feature at its lower bound maps to angle 0 and at its upper bound to
/// `angle_scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub kind: EncoderKind,
    pub n_features: usize,
    pub angle_scale: f64,
    pub feature_bounds: Vec<(f64, f64)>,
}

impl EncoderSpec {
    pub fn angle(feature_bounds: Vec<(f64, f64)>) -> Self {
        EncoderSpec {
            kind: EncoderKind::Angle,
            n_features: feature_bounds.len(),
            angle_scale: core::f64::consts::PI,
            feature_bounds,
        }
    }

    pub fn amplitude(n_features: usize) -> Self {
        EncoderSpec {
            kind: EncoderKind::Amplitude,
            n_features,
            angle_scale: core::f64::consts::PI,
            feature_bounds: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_features == 0 {
            return Err(Error::Config("encoder needs at least one feature".into()));
        }
        if self.kind == EncoderKind::Angle {
            if self.feature_bounds.len() != self.n_features {
                return Err(Error::shape(
                    "encoder feature bounds",
                    self.n_features,
                    self.feature_bounds.len(),
                ));
            }
            if self
                .feature_bounds
                .iter()
                .any(|&(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite())
            {
                return Err(Error::Config("feature bounds must satisfy min < max".into()));
            }
            if !self.angle_scale.is_finite() {
                return Err(Error::Config("angle scale must be finite".into()));
            }
        }
        Ok(())
    }

    /// Qubits needed to hold the features.
    pub fn min_qubits(&self) -> usize {
        match self.kind {
            EncoderKind::Angle => 1,
            EncoderKind::Amplitude => {
                let mut n = 0;
                while (1usize << n) < self.n_features {
                    n += 1;
                }
                n.max(1)
            }
        }
    }

    /// Number of encoded slots on an `n_qubits` register.
    pub fn n_slots(&self, n_qubits: usize) -> usize {
        match self.kind {
            EncoderKind::Angle => self.n_features.max(n_qubits),
            EncoderKind::Amplitude => 0,
        }
    }

    /// Encoding gates reading slots `first_slot..`.
    pub fn gates(&self, n_qubits: usize, first_slot: usize) -> Result<Vec<GateOp>> {
        (0..self.n_slots(n_qubits))
            .map(|s| GateOp::slotted(GateKind::RY, &[s % n_qubits], &[first_slot + s]))
            .collect()
    }

    /// `d angle / d feature` for feature `f`.
    pub fn angle_slope(&self, f: usize) -> f64 {
        let (lo, hi) = self.feature_bounds[f];
        self.angle_scale / (hi - lo)
    }

    /// Encoded slot values for `features`.
    pub fn angles(&self, features: &[f64], n_qubits: usize) -> Result<Vec<f64>> {
        self.check_features(features)?;
        Ok((0..self.n_slots(n_qubits))
            .map(|s| {
                let f = s % self.n_features;
                let (lo, _) = self.feature_bounds[f];
                (features[f] - lo) * self.angle_slope(f)
            })
            .collect())
    }

    /// Amplitude-encoded state on `n_qubits`, zero padded and normalized.
    pub fn amplitude_state(&self, features: &[f64], n_qubits: usize) -> Result<StateVector> {
        self.check_features(features)?;
        if n_qubits < self.min_qubits() {
            return Err(Error::Config(format!(
                "{} features need {} qubits, circuit has {n_qubits}",
                self.n_features,
                self.min_qubits()
            )));
        }
        let norm = features.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::DegenerateEncoding);
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        for (a, &x) in amps.iter_mut().zip(features) {
            *a = C64::new(x / norm, 0.0);
        }
        StateVector::from_amplitudes(amps)
    }

    fn check_features(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.n_features {
            return Err(Error::shape("encoder features", self.n_features, features.len()));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("features must be finite".into()));
        }
        Ok(())
    }

    /// Circuit holding only the encoding gates.
    pub fn circuit(&self, n_qubits: usize) -> Result<CircuitSpec> {
        let mut c = CircuitSpec::new(n_qubits, 0, self.n_slots(n_qubits));
        c.gates = self.gates(n_qubits, 0)?;
        Ok(c)
    }
}
