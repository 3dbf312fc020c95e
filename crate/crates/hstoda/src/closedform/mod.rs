//! Explicit solutions of the cubic flow in the normal-form frame.
//!
//! Two regimes are solvable without numerically integrating the equations of
//! motion:
//!
//! * a single 2x2 block (complex dimension two) closes in trigonometric
//!   functions — see [`solve_n2`];
//! * one block plus one further component (a second block or the odd scalar)
//!   reduces to a one-dimensional quadrature for the signed radius of the
//!   first block, from which every other coordinate is reconstructed — see
//!   [`solve_n34`].
//!
//! Both evaluators are pure: a solution object is immutable after
//! construction and can be sampled at arbitrary times. Direct numerical
//! integration of the same flow (see [`crate::dynamics`]) serves as the
//! ground truth in all the tests here; the explicit formulas are the objects
//! under test.

mod n2;
mod n34;
mod quartic;

pub use n2::{n2_invariant_checks, solve_n2, N2InvariantReport, N2Mode, N2Solution};
pub use n34::{solve_n34, FrameScalars, N34Solution};
pub use quartic::{quartic_w4, QuarticData};

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real amplitude data of one 2-vector component `xi = u + iv`, recovered
/// from rotating-frame scalars instead of the vector itself.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlockAmplitudes {
    /// `|u|^2 + |v|^2` (only consumed by consistency tests).
    #[allow(dead_code)]
    pub t: f64,
    /// `|u|^2`.
    pub big_a: f64,
    /// `|v|^2`.
    pub big_b: f64,
    /// `u . v`.
    pub p: f64,
    /// `det [u, v]`.
    pub d: f64,
}

/// Inverts the scalar pair `r = a t + 2 lambda d`, `c = lambda t + 2 a d`
/// together with `eta = (A - B) + 2 i P` to the amplitude data of a block.
///
/// The linear system for `(t, d)` has determinant `a^2 - lambda^2`; a
/// configuration with `a^2 = lambda^2` leaves the pair undetermined and is
/// rejected.
pub(crate) fn block_amplitudes(
    lambda: f64,
    c_block: f64,
    a: f64,
    eta: Complex64,
    r: f64,
) -> Result<BlockAmplitudes> {
    let nu = a * a - lambda * lambda;
    if nu.abs() < 1e-12 {
        return Err(Error::Degenerate(
            "block amplitudes undetermined when a^2 = lambda^2".into(),
        ));
    }
    let t = (a * r - lambda * c_block) / nu;
    let d = if lambda.abs() > 1e-8 {
        (r - a * t) / (2.0 * lambda)
    } else {
        // lambda ~ 0 forces |a| > 1e-6 through the determinant check above.
        c_block / (2.0 * a)
    };
    Ok(BlockAmplitudes {
        t,
        big_a: 0.5 * (t + eta.re),
        big_b: 0.5 * (t - eta.re),
        p: 0.5 * eta.im,
        d,
    })
}

/// Angle velocities of one block computed purely from rotating-frame
/// scalars. This mirrors [`crate::dynamics::angles_rhs`], which takes the
/// 2-vector itself; the two routes are cross-checked in the tests.
pub(crate) fn scalar_angle_rates(
    lambda: f64,
    c_block: f64,
    a: f64,
    c2: f64,
    eta: Complex64,
    r: f64,
    sigma: Complex64,
    t_query: f64,
) -> Result<(f64, f64)> {
    let amp = block_amplitudes(lambda, c_block, a, eta, r)?;
    if amp.big_a < 1e-10 || amp.big_b < 1e-10 {
        return Err(Error::SingularConfiguration {
            t: t_query,
            reason: "angle parameterization degenerates (amplitude below 1e-10)".into(),
        });
    }
    let common = -2.0 * lambda * (1.0 + c2);
    let swirl = 2.0 * a * amp.d * sigma.re + 2.0 * lambda * amp.p * sigma.im;
    let drive = 2.0 * a * (1.0 + c2) * amp.d;
    let dalpha = common + 2.0 * lambda * sigma.re + (swirl + drive) / amp.big_a;
    let dbeta =
        common - 2.0 * lambda * sigma.re + (2.0 * lambda * amp.p * sigma.im
            - 2.0 * a * amp.d * sigma.re
            + drive)
            / amp.big_b;
    Ok((dalpha, dbeta))
}

/// Rebuilds a 2-vector component from its amplitudes and polar angles:
/// `xi = sqrt(A) (cos alpha, sin alpha) + i sqrt(B) (cos beta, sin beta)`.
pub(crate) fn xi_from_angles(big_a: f64, big_b: f64, alpha: f64, beta: f64) -> Vector2<Complex64> {
    let ra = big_a.max(0.0).sqrt();
    let rb = big_b.max(0.0).sqrt();
    Vector2::new(
        Complex64::new(ra * alpha.cos(), rb * beta.cos()),
        Complex64::new(ra * alpha.sin(), rb * beta.sin()),
    )
}
