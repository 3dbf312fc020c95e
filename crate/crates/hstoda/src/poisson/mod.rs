//! Poisson structures on the truncated operator charts.
//!
//! The module provides the coordinate charts, scalar fields with analytic or
//! finite-difference gradients, the five bracket families (full canonical,
//! deformed upper, lower-plus-diagonal, weighted, banded) together with
//! their pencils, Hamiltonian vector fields, structure constants, Jacobi
//! residuals, and the compatibility classifier for sequence pairs.

pub(crate) mod bracket;
mod chart;
mod field;
mod pencil;
mod structure;

pub use bracket::{bracket, ham_vector_field, structure_bracket, BracketKind};
pub use chart::{idx_full, idx_kdiag, idx_lower_diag, idx_upper, Chart};
pub use field::{ScalarField, DEFAULT_FD_STEP};
pub use pencil::{
    pencil_classify, pencil_linearity_residual, pencil_violation, Band, PencilVerdict,
};
pub use structure::{jacobi_residual, StructureTensor};
