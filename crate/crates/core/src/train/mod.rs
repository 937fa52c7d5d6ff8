//! Losses, gradients, optimizers, readout noise and the training loop.

mod data;
mod grad;
mod loop_;
mod loss;
mod optim;

pub use data::Dataset;
pub use grad::{classical_grad, loss_and_grad, parameter_shift_grad, quantum_vjp};
pub use loop_::{train_model, EpochRecord, NoiseSpec, TrainConfig, TrainTrace};
pub use loss::{mse_loss, LossSpec, PhysicsResidual};
pub use optim::{OptimizerKind, OptimizerState};
