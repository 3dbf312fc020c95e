//! The quartic potential governing the radius oscillation of the leading
//! block in the two-component reduced systems.
//!
//! For one genuine block (frequency `lambda_1`) coupled to one further
//! component (frequency `lambda_k`; zero for the odd scalar), the square of
//! the out-of-phase coordinate `p_1` is a quartic polynomial in the signed
//! radius `r_1` plus a constant of motion:
//!
//! ```text
//! p_1^2 = e + w4(r_1),        w4(0) = 0.
//! ```
//!
//! `w4` is determined by the conserved quantities of the rotating frame and
//! `e` is fixed by the initial data. The radius then satisfies
//! `dr_1/dt = 4 rho nu_1 p_1`, which is solved by quadrature in
//! [`super::n34`].

use crate::error::{Error, Result};

/// Checks the non-degeneracy preconditions of the two-component reduction
/// and returns the frequency combinations `(nu_1, nu_k, lambda_k^2 - lambda_1^2)`.
pub(crate) fn validate_frequencies(
    a: f64,
    lambda1: f64,
    lambda_k: f64,
    rho: f64,
) -> Result<(f64, f64, f64)> {
    let nu1 = a * a - lambda1 * lambda1;
    let nu_k = a * a - lambda_k * lambda_k;
    let lam_gap = lambda_k * lambda_k - lambda1 * lambda1;
    if nu1.abs() < 1e-10 {
        return Err(Error::Degenerate(
            "a^2 - lambda_1^2 vanishes: leading block radius rate degenerates".into(),
        ));
    }
    if nu_k.abs() < 1e-10 {
        return Err(Error::Degenerate(
            "a^2 - lambda_k^2 vanishes: partner component degenerates".into(),
        ));
    }
    if lam_gap.abs() < 1e-10 {
        return Err(Error::Degenerate(
            "lambda_k^2 - lambda_1^2 vanishes: components are resonant".into(),
        ));
    }
    if rho.abs() < 1e-10 {
        return Err(Error::Degenerate(
            "frame radius rho vanishes: rotating frame undefined".into(),
        ));
    }
    Ok((nu1, nu_k, lam_gap))
}

/// Coefficients and constants of the radius quartic `e + w4(r_1)`.
///
/// `coeffs[i]` multiplies `r_1^(i+1)`; the quartic has no constant term by
/// normalization, which is what makes `e` well defined.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticData {
    /// Coefficients of `r_1, r_1^2, r_1^3, r_1^4` in `w4`.
    pub coeffs: [f64; 4],
    /// The conserved offset `p_1(0)^2 - w4(r_1(0))`.
    pub e: f64,
    /// Deformation parameter of the trailing block.
    pub a: f64,
    /// Frequency of the leading block.
    pub lambda1: f64,
    /// Frequency of the partner component (zero for the odd scalar).
    pub lambda_k: f64,
    /// Frame radius `|sum eta|`.
    pub rho: f64,
    /// Weighted radius invariant `r_1/nu_1 + r_k/nu_k`.
    pub f: f64,
    /// Quadratic invariant `rho nu_k q_k + rho nu_1 q_1 - (r_1 + r_k)^2 / 2`.
    pub g: f64,
}

impl QuarticData {
    /// Builds the quartic from the conserved frame quantities and the
    /// initial point `(r_1(0), p_1(0))`.
    ///
    /// Rejects configurations where any of the denominators
    /// `nu_1 = a^2 - lambda_1^2`, `nu_k = a^2 - lambda_k^2`,
    /// `Lambda = lambda_k^2 - lambda_1^2`, or the frame radius `rho`
    /// degenerates.
    #[allow(clippy::too_many_arguments)]
    pub fn from_invariants(
        a: f64,
        lambda1: f64,
        lambda_k: f64,
        rho: f64,
        f: f64,
        g: f64,
        r1_init: f64,
        p1_init: f64,
    ) -> Result<Self> {
        let (nu1, nu_k, lam_gap) = validate_frequencies(a, lambda1, lambda_k, rho)?;

        // Shorthands: the radius sum R = r_1 + r_k is affine in r_1,
        //   R(r_1) = F + s r_1,  F = nu_k f,  s = Lambda / nu_1,
        // and the quadratic invariant enters only through G = g - rho^2 nu_k.
        let cap_f = nu_k * f;
        let cap_g = g - rho * rho * nu_k;
        let s = lam_gap / nu1;
        let denom = rho * rho * lam_gap * lam_gap;

        let c1 = -s * cap_f * (2.0 * cap_g + cap_f * cap_f) / denom;
        let c2 = 1.0 / nu1 - s * s * (cap_g + 1.5 * cap_f * cap_f) / denom;
        let c3 = -cap_f * s * s * s / denom;
        let c4 = -s * s * s * s / (4.0 * denom);

        let mut data = Self {
            coeffs: [c1, c2, c3, c4],
            e: 0.0,
            a,
            lambda1,
            lambda_k,
            rho,
            f,
            g,
        };
        data.e = p1_init * p1_init - quartic_w4(r1_init, &data);
        Ok(data)
    }

    /// The oscillation radicand `e + w4(r_1)`; equals `p_1^2` on the
    /// trajectory.
    pub fn radicand(&self, r1: f64) -> f64 {
        self.e + quartic_w4(r1, self)
    }

    /// Derivative of the radicand with respect to `r_1`.
    pub fn radicand_derivative(&self, r1: f64) -> f64 {
        let [c1, c2, c3, c4] = self.coeffs;
        c1 + r1 * (2.0 * c2 + r1 * (3.0 * c3 + r1 * 4.0 * c4))
    }

    /// Full coefficient vector `[e, c1, c2, c3, c4]` of the radicand.
    pub(crate) fn radicand_coefficients(&self) -> [f64; 5] {
        let [c1, c2, c3, c4] = self.coeffs;
        [self.e, c1, c2, c3, c4]
    }
}

/// Evaluates the quartic `w4` at a radius value; `w4(0) = 0` by
/// construction.
pub fn quartic_w4(r1: f64, data: &QuarticData) -> f64 {
    let [c1, c2, c3, c4] = data.coeffs;
    r1 * (c1 + r1 * (c2 + r1 * (c3 + r1 * c4)))
}
