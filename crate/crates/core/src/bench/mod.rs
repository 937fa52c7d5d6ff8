//! Benchmark problems: the multi-vortex field, scalar transport in a
//! reversing swirl, and relative error metrics.

mod advection;
mod field;
mod metrics;

pub use advection::{
    advect_step, advection_velocity, initial_scalar, run_period, total_mass, Advection, AdvectionSpec, FluxOperator,
    Integrator, OperatorChoice, PeriodRun, Snapshot, SNAPSHOT_TIMES,
};
pub use field::{
    fit_field_dataset, total_field, vortex_component, StencilProblem, VortexFieldSpec, VortexParams, DEFAULT_VORTICES,
};
pub use metrics::{error_metrics, ErrorMetrics};
