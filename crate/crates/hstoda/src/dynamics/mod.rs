//! Time integration of the Hamilton equations in every chart: packed
//! bracket flows, block/complex/reduced/rotated pipelines for the cubic
//! flow, and conservation reporting.

mod flow;
mod rhs;
mod state;

pub use flow::{
    conservation_report, flow, integrate_cubic, integrate_reduced, integrate_rotated,
    write_trajectory_csv, ConservationReport, DriftEntry, IntegratorConfig, Trajectory,
};
pub use rhs::{
    angles_rhs, block_rhs, complex_rhs, cubic_hamiltonian, cubic_rhs, nu_values, phase_rhs,
    reduced_rhs, rotated_rhs, ReducedTangent,
};
pub use state::{
    skew_normal_form, BlockState, ComplexState, ComponentScalars, ReducedState, RotatedState,
};

pub(crate) use state::component_scalars;
