//! Deformed Toda-type integrable hierarchies at finite truncation size N.
//!
//! The library realizes a family of Lie–Poisson structures on triangular
//! matrices obtained by deforming the associative product with a sequence
//! `a_0..a_{N-1}` of reals bounded by one. On top of the deformed operator
//! algebra it provides:
//!
//! - the coinduced Poisson brackets (canonical, upper-triangular deformed,
//!   lower/diagonal, diagonal-weighted, k-diagonal, and pencil blends),
//! - Casimir functions and the bi-Hamiltonian (Magri) integrals obtained by
//!   expanding pencil invariants in the pencil parameter,
//! - coadjoint group/algebra actions used to certify invariance,
//! - numerical Hamilton flows in five equivalent coordinate charts with
//!   conservation reporting,
//! - closed-form (trigonometric) and quadrature (elliptic-type) solutions for
//!   the low-dimensional reduced systems, verified against the numerical flow.
//!
//! The `verify` module packages every identity as a machine-checkable
//! criterion; the `hstoda` binary exposes verification, simulation, Casimir
//! evaluation, closed-form comparison and parameter sweeps behind a JSON
//! config.

pub mod closedform;
pub mod dynamics;
pub mod error;
pub mod invariants;
pub mod numeric;
pub mod op;
pub mod poisson;
pub mod verify;

pub use error::{Error, Result};
