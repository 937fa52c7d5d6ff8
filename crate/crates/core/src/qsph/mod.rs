//! Learned kernel operators. A [`PairKernel`] supplies the pair weights
//! that SPH sums use; [`ExactKernel`] wraps the classical Quintic kernel and
//! [`QuantumKernelModel`] wraps trained hybrid networks.

mod dataset;
mod kernel;
mod ops;

pub use dataset::{
    fit_kernel_net, generate_kernel_dataset, FittedNet, GradSample, KernelDataset, KernelFitConfig, ValueSample,
};
pub use kernel::{
    gradient_features, value_features, Correction, ExactKernel, KernelNet, PairKernel, PreMap, QuantumKernelModel,
};
pub use ops::{
    distance_grid, extract_gradient_space, extract_kernel_space, quantum_momentum_rhs, quantum_sph_gradient,
    quantum_sph_value, KernelSpaceRow,
};

#[cfg(test)]
mod tests;
