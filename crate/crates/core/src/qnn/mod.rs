//! Encoders, ansatz builders for the three network families, and
//! measurement heads.

mod ansatz;
mod block;
mod encoder;
mod head;

pub use ansatz::{build_ansatz, build_qcnn, AnsatzSpec, Family, QCNN_DENSE_SEQUENCE};
pub use block::{quantum_forward, QuantumBlock};
pub use encoder::{EncoderKind, EncoderSpec};
pub use head::{HeadKind, MeasurementHead};
