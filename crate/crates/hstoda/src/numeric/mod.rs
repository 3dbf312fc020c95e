//! Numerical infrastructure: ODE integration, quadrature, matrix exponential.
//!
//! Everything in this module is generic plumbing with tight, testable error
//! control; the mathematical content of the library lives in the other
//! modules.

mod expm;
mod ode;
mod quad;

pub use expm::matrix_exp;
pub use ode::{integrate_dp45, integrate_rk4_fixed, OdeOptions, OdeSolution};
pub use quad::{adaptive_integral, gauss_legendre, CumulativeQuadrature};
