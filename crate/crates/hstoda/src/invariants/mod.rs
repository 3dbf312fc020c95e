//! Conserved quantities: spectral trace invariants of the deformed
//! hierarchy, closed polynomial Casimirs at size 6, block-chart integrals,
//! and the pencil-expansion families in mutual involution.

mod block;
mod coadjoint;
mod magri;
mod poly;
mod registry;
mod sixdim;
mod spectral;

pub use block::block_integral_field;
pub(crate) use block::block_integral_poly;
pub use coadjoint::{ad_star, coadjoint_action, Picture};
pub use magri::{
    hkn_closed_field, involution_residual, magri_coefficients, magri_field,
};
pub use poly::Poly;
pub use registry::{
    eval_invariant, invariant_chart, invariant_field, InvariantContext, InvariantId,
};
pub use sixdim::{sixdim_c2_field, sixdim_c3_field};
pub use spectral::{
    ik_alpha_field, quadratic_kernel_field, trace_power_alpha_field, trace_power_diag_field,
    trace_power_field,
};
