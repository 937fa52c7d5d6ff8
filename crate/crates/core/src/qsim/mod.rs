//! Dense statevector simulation of parameterized circuits.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. Two-qubit
//! gate matrices are written in the local basis `|a b⟩` with `a = targets[0]`
//! as the more significant bit, so for controlled gates `targets[0]` is the
//! control.

mod circuit;
mod gate;
mod state;

pub use circuit::{run_circuit, Angle, CircuitSpec, GateOp};
pub use gate::{gate_matrix, GateKind, GateMatrix, Mat2, Mat4, ShiftRule};
pub use state::{expectation_z, measure_probabilities, StateVector, MAX_QUBITS};

pub use num_complex::Complex64 as C64;
