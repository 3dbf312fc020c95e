//! Finite-truncation operator algebra.
//!
//! This module provides the building blocks every other part of the crate
//! consumes: the deformation sequence and its multiplicative coefficient
//! table, the triangular splitting of a dense matrix, the deformed
//! (non-orthogonal) projectors, the skew-type basis elements, the weighted
//! commutator, and the diagonal shift operators used by the banded charts.

mod alpha;
mod diagonal;
mod operator;
mod sequence;

pub use alpha::{alpha_apply, build_alpha, AlphaCoefficients};
pub use diagonal::{shift_down, shift_up, DiagonalVector};
pub use operator::{
    basis_e, diagonal_part, eta_bracket, in_o_eta, is_strictly_upper, project_alpha,
    project_minus0, project_plus_alpha, split, strictly_lower, strictly_upper, Mat,
};
pub use sequence::DeformationSequence;

pub use crate::numeric::matrix_exp;
