//! Quantum kernel networks for smoothed particle hydrodynamics.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. Everything here is pure numerics: a dense statevector simulator,
//! variational ansatz builders, hybrid classical/quantum models with
//! parameter-shift training, a corrected-kernel SPH substrate, learned kernel
//! operators that substitute for SPH kernel weights, and the two benchmark
//! problems (static multi-vortex field, transient scalar advection).
//!
//! File formats, the CLI and wall-clock timing live in the `qsph` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bench;
pub mod error;
pub mod hybrid;
pub mod qnn;
pub mod qsim;
pub mod qsph;
pub mod rng;
pub mod sph;
pub mod train;

mod par;

pub use error::{Error, Result};

/// Imports shared by every module. `Float` supplies the transcendental
/// functions through `libm` when `std` is unavailable.
#[allow(unused_imports)]
pub(crate) mod prelude {
    pub use alloc::borrow::ToOwned;
    pub use alloc::boxed::Box;
    pub use alloc::format;
    pub use alloc::string::String;
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    pub use num_traits::Float;
}
