//! Classical dense stacks and the four hybrid topologies.

mod dense;
mod model;

pub use dense::{dense_forward, Activation, DenseLayer, DenseSpec};
pub use model::{model_forward, parameter_layout, HybridModel, Level, ModelConfig, ParameterLayout};
