//! Quintic-kernel SPH: summation operators, first-order gradient
//! correction and fixed-radius neighbour search.
//!
//! Displacements follow `r_ij = x_i − x_j` and `∇ω_ij` is the kernel
//! gradient with respect to `x_i`.

mod kernel;
mod neighbors;
mod ops;
mod particles;

pub use kernel::KernelSpec;
pub use neighbors::{brute_force_neighbors, build_neighbors, Neighbor, NeighborList};
pub use ops::{
    correction_matrices, correction_matrix, corrected_gradient, sph_gradient, sph_value, CorrectionMatrix,
};
pub use particles::{ParticleSet, DEFAULT_GHOST_LAYERS, DEFAULT_H_RATIO, DEFAULT_JITTER};

/// 2D vector.
pub type Vec2 = [f64; 2];
