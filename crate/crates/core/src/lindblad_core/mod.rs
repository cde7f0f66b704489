//! Superoperator engine on truncated Hilbert spaces.

mod channel;
mod composite;
mod dynamics;
mod expm;
mod generator;
mod operator;
mod sparse;

pub use channel::{choi_matrix, cptp_check, CptpReport};
pub use composite::{
    compose_composite_generator, interaction_generator, lift_environment, lift_system, partial_trace,
    partial_trace_operator, project_p0, Dims, Subsystem,
};
pub use dynamics::{
    adjoint_propagate, adjoint_propagate_grid, propagate, propagate_grid, propagate_vec, propagate_vec_grid,
    propagator_matrix, spectral_gap, stationary_state, DENSE_GRID_DIM, EVOLVED_TRACE_TOL, UNIQUENESS_RCOND,
};
pub use expm::{expm_dense, expv, ExpvOptions, ExpvOutput, LinearMap};
pub use generator::{
    fock_operators, lindblad_generator, sns_dissipator, sns_generator, sns_generator_unchecked, FockOperators,
    JumpTerm, Superoperator, SuperoperatorKind,
};
pub(crate) use generator::SandwichBuilder;
pub use operator::{trace_distance, DensityMatrix, Operator, C64, HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL};
pub(crate) use operator::c;
pub use sparse::CsrMatrix;
