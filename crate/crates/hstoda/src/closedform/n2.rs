//! Trigonometric solution of the cubic flow for a single 2x2 block
//! (complex dimension two).
//!
//! In the normal-form frame the quadratic form `eta = xi^T xi` of the block
//! rotates rigidly, `eta(t) = rho e^{i theta(t)}` with
//! `theta = omega_1 t + phi_0`, so the amplitudes
//! `A = |Re xi|^2, B = |Im xi|^2` oscillate harmonically:
//!
//! ```text
//! A(t) = (c^2 + rho cos theta)/2,     B(t) = (c^2 - rho cos theta)/2.
//! ```
//!
//! The polar angles of `Re xi` and `Im xi` then obey rational-in-`cos`
//! equations whose primitive is an arctangent of the half-angle tangent.
//! Partial-fraction reduction puts both angle rates into the common shape
//! `C + P / (c^2 ± rho cos theta)`, which integrates to
//!
//! ```text
//! alpha(t) = alpha_0 + C t + (P / omega_1) [G₊(theta(t)) - G₊(phi_0)],
//! ```
//!
//! and likewise for `beta` with `G₋`, where `G±` are the continued
//! arctangent primitives of `1/(c^2 ± rho cos theta)`. The primitives are
//! only locally valid as printed; continuity across half-angle branch jumps
//! is restored by shifting the arctangent by a winding count.

use std::f64::consts::PI;

use nalgebra::{DVector, Vector2};
use num_complex::Complex64;

use crate::dynamics::{component_scalars, ComplexState, ReducedState};
use crate::error::{Error, Result};
use crate::numeric::adaptive_integral;
use crate::op::Mat;

use super::xi_from_angles;

/// Evaluation regime of the two-dimensional closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum N2Mode {
    /// Generic case: angles advance by continued arctangent primitives.
    Trig,
    /// `rho = 0`: the quadratic form vanishes identically, the amplitudes
    /// are frozen at `c^2/2`, and both angles advance linearly.
    RhoZero,
    /// `|omega_1|` below threshold: the frame phase is frozen, so both
    /// angle rates are constant and the angles advance linearly.
    OmegaZero,
    /// Fallback outside the arctangent domain (`c^4 < rho^2`, impossible
    /// for data derived from an actual state): the angle rates are
    /// integrated by adaptive quadrature instead of evaluated in closed
    /// form.
    QuadratureRates,
}

/// Immutable evaluator for the single-block solution.
///
/// The public fields record the constants of the motion; `r1^2` equals
/// `(a^2 - lambda1^2) rho^2 + c1^2` identically, and `c^2 >= rho` always
/// holds for data built from a state.
#[derive(Debug, Clone)]
pub struct N2Solution {
    /// Frame frequency `-4a(1 + c^2) + 4 r1`.
    pub omega1: f64,
    /// Initial phase of the quadratic form.
    pub phi0: f64,
    /// Signed radius `a c^2 + 2 lambda1 det[x, y]`.
    pub r1: f64,
    /// Squared amplitude `conj(z)^T z`.
    pub c2: f64,
    /// Modulus of the quadratic form `z^T z`.
    pub rho: f64,
    /// Block invariant `lambda1 c^2 + 2 a det[x, y]`.
    pub c1: f64,
    /// Block frequency from the normal form of the trailing block.
    pub lambda1: f64,
    /// Deformation parameter.
    pub a: f64,
    /// Sign of `det[x, y]` in the frame; fixes the square-root branch of
    /// the area invariant.
    pub branch: f64,
    mode: N2Mode,
    /// Constant part `C` of both angle rates.
    rate_offset: f64,
    /// Strength `P` of the `1/(c^2 ± rho cos theta)` part.
    rate_strength: f64,
    /// `sqrt(c^4 - rho^2)`.
    disc_root: f64,
    alpha0: f64,
    beta0: f64,
    o: Mat,
}

/// Continued primitive of `1/(m ± rho cos theta)` in the half-angle
/// variable: `factor` is `m ∓ rho` and `root = sqrt(m^2 - rho^2)`, giving
///
/// ```text
/// G(theta) = (2/root) [ atan(factor tan(theta/2) / root) + k pi ]
/// ```
///
/// with `k` the winding count of `theta` across odd multiples of `pi`,
/// which removes the jump of the bare arctangent.
fn half_angle_primitive(theta: f64, factor: f64, root: f64) -> f64 {
    let winding = ((theta + PI) / (2.0 * PI)).floor();
    let reduced = theta - 2.0 * PI * winding;
    2.0 * ((factor * (0.5 * reduced).tan() / root).atan() + winding * PI) / root
}

/// Builds the trigonometric evaluator from a complex dimension-two state.
///
/// Fails with a shape error unless `z` has length two, and with a
/// degeneracy error when `|c^4/rho^2 - 1| < 1e-10` (the arctangent modulus
/// collapses; equivalently `det[x, y] ~ 0`, where an amplitude periodically
/// vanishes and the angle parameterization breaks down).
pub fn solve_n2(state: &ComplexState) -> Result<N2Solution> {
    if state.z.len() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "trigonometric solution requires a complex 2-vector, got length {}",
            state.z.len()
        )));
    }
    let red = ReducedState::from_complex(state)?;
    let a = state.a;
    let lambda1 = red.lambdas[0];
    let xi = red.xi[0];
    let s = component_scalars(&xi);
    let c2 = s.t;
    let eta0 = xi[0] * xi[0] + xi[1] * xi[1];
    let rho = eta0.norm();
    let phi0 = if rho > 0.0 { eta0.arg() } else { 0.0 };

    let c1 = lambda1 * c2 + 2.0 * a * s.d;
    let r1 = a * c2 + 2.0 * lambda1 * s.d;
    let omega1 = -4.0 * a * (1.0 + c2) + 4.0 * r1;
    let rate_offset = -2.0 * lambda1 + 4.0 * a * s.d;
    let rate_strength = 2.0 * lambda1 * (rho * rho - c2 * c2) + 4.0 * a * s.d;

    let disc = c2 * c2 - rho * rho;
    let mode = if rho < 1e-12 {
        N2Mode::RhoZero
    } else if disc.abs() < 1e-10 * rho * rho {
        return Err(Error::Degenerate(format!(
            "modulus degenerates: |z^T z| = {rho} reaches conj(z)^T z = {c2}"
        )));
    } else if disc < 0.0 {
        N2Mode::QuadratureRates
    } else if omega1.abs() < 1e-8 {
        N2Mode::OmegaZero
    } else {
        N2Mode::Trig
    };

    Ok(N2Solution {
        omega1,
        phi0,
        r1,
        c2,
        rho,
        c1,
        lambda1,
        a,
        branch: if s.d >= 0.0 { 1.0 } else { -1.0 },
        mode,
        rate_offset,
        rate_strength,
        disc_root: disc.max(0.0).sqrt(),
        alpha0: f64::atan2(xi[1].re, xi[0].re),
        beta0: f64::atan2(xi[1].im, xi[0].im),
        o: red.o,
    })
}

impl N2Solution {
    /// The regime the evaluator runs in.
    pub fn mode(&self) -> N2Mode {
        self.mode
    }

    fn theta(&self, t: f64) -> f64 {
        self.omega1 * t + self.phi0
    }

    /// Instantaneous angle velocities `(d alpha/dt, d beta/dt)`.
    pub fn angle_rates(&self, t: f64) -> (f64, f64) {
        let w = self.rho * self.theta(t).cos();
        (
            self.rate_offset + self.rate_strength / (self.c2 + w),
            self.rate_offset + self.rate_strength / (self.c2 - w),
        )
    }

    /// Polar angles `(alpha, beta)` of `Re xi` and `Im xi` at time `t`.
    pub fn angles(&self, t: f64) -> (f64, f64) {
        match self.mode {
            N2Mode::Trig => {
                let theta = self.theta(t);
                let ga = half_angle_primitive(theta, self.c2 - self.rho, self.disc_root)
                    - half_angle_primitive(self.phi0, self.c2 - self.rho, self.disc_root);
                let gb = half_angle_primitive(theta, self.c2 + self.rho, self.disc_root)
                    - half_angle_primitive(self.phi0, self.c2 + self.rho, self.disc_root);
                let scale = self.rate_strength / self.omega1;
                (
                    self.alpha0 + self.rate_offset * t + scale * ga,
                    self.beta0 + self.rate_offset * t + scale * gb,
                )
            }
            N2Mode::RhoZero | N2Mode::OmegaZero => {
                // The amplitudes are frozen, so the initial rates persist.
                let w0 = self.rho * self.phi0.cos();
                let (ra, rb) = if self.c2 > 0.0 {
                    (
                        self.rate_offset + self.rate_strength / (self.c2 + w0),
                        self.rate_offset + self.rate_strength / (self.c2 - w0),
                    )
                } else {
                    // The zero state is a fixed point; the angles are moot.
                    (self.rate_offset, self.rate_offset)
                };
                (self.alpha0 + ra * t, self.beta0 + rb * t)
            }
            N2Mode::QuadratureRates => {
                let rate_a = |s: f64| self.angle_rates(s).0;
                let rate_b = |s: f64| self.angle_rates(s).1;
                (
                    self.alpha0 + adaptive_integral(&rate_a, 0.0, t, 1e-11),
                    self.beta0 + adaptive_integral(&rate_b, 0.0, t, 1e-11),
                )
            }
        }
    }

    /// The block component `xi(t)` in the normal-form frame.
    pub fn xi(&self, t: f64) -> Vector2<Complex64> {
        let w = self.rho * self.theta(t).cos();
        let big_a = 0.5 * (self.c2 + w);
        let big_b = 0.5 * (self.c2 - w);
        let (alpha, beta) = self.angles(t);
        xi_from_angles(big_a, big_b, alpha, beta)
    }

    /// The solution `z(t) = O^T xi(t)` in the original coordinates.
    pub fn eval(&self, t: f64) -> DVector<Complex64> {
        let xi = self.xi(t);
        DVector::from_fn(2, |c, _| xi[0] * self.o[(0, c)] + xi[1] * self.o[(1, c)])
    }

    /// Determinant of the stored frame (`±1`), needed to compare
    /// frame-odd quantities in the original coordinates.
    fn frame_sign(&self) -> f64 {
        let d = self.o[(0, 0)] * self.o[(1, 1)] - self.o[(0, 1)] * self.o[(1, 0)];
        if d >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Residual report of the two pointwise invariants of the single-block
/// solution: the squared amplitude `|x|^2 + |y|^2 = c^2` and the
/// parallelogram area `det[x, y] = ± sqrt(c^4 - rho^2)/2`.
#[derive(Debug, Clone, Copy)]
pub struct N2InvariantReport {
    /// Largest deviation of `|x(t)|^2 + |y(t)|^2` from `c^2`.
    pub max_norm_residual: f64,
    /// Largest deviation of the area from its conserved value.
    pub max_area_residual: f64,
}

impl N2InvariantReport {
    /// The larger of the two residuals.
    pub fn max_residual(&self) -> f64 {
        self.max_norm_residual.max(self.max_area_residual)
    }
}

/// Evaluates the solution on the given time samples and measures how well
/// the amplitude and area invariants hold.
pub fn n2_invariant_checks(solution: &N2Solution, times: &[f64]) -> N2InvariantReport {
    let area_target =
        solution.frame_sign() * solution.branch * 0.5 * solution.disc_root;
    let mut max_norm_residual: f64 = 0.0;
    let mut max_area_residual: f64 = 0.0;
    for &t in times {
        let z = solution.eval(t);
        let norm: f64 = z.iter().map(Complex64::norm_sqr).sum();
        let area = z[0].re * z[1].im - z[1].re * z[0].im;
        max_norm_residual = max_norm_residual.max((norm - solution.c2).abs());
        max_area_residual = max_area_residual.max((area - area_target).abs());
    }
    N2InvariantReport {
        max_norm_residual,
        max_area_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{angles_rhs, integrate_cubic, IntegratorConfig};

    fn pseudo(seed: usize, i: usize) -> f64 {
        (((i * 17 + seed * 23 + 3) % 31) as f64) / 31.0 - 0.45
    }

    fn random_state(seed: usize) -> ComplexState {
        let mut delta = Mat::zeros(2, 2);
        delta[(0, 1)] = 0.6 + 0.4 * pseudo(seed, 1);
        ComplexState {
            z: DVector::from_vec(vec![
                Complex64::new(0.55 + 0.3 * pseudo(seed, 2), 0.4 * pseudo(seed, 3)),
                Complex64::new(0.4 * pseudo(seed, 4), 0.5 + 0.3 * pseudo(seed, 5)),
            ]),
            a: 0.35 + 0.3 * pseudo(seed, 6),
            delta,
        }
    }

    fn max_flow_error(state: &ComplexState, horizon: f64, samples: usize) -> f64 {
        let sol = solve_n2(state).unwrap();
        let cfg = IntegratorConfig::new((0.0, horizon)).with_samples(samples);
        let (times, states) = integrate_cubic(state, &cfg).unwrap();
        let mut max_err: f64 = 0.0;
        for (t, oracle) in times.iter().zip(&states) {
            let z = sol.eval(*t);
            for i in 0..2 {
                max_err = max_err.max((z[i] - oracle.z[i]).norm());
            }
        }
        max_err
    }

    #[test]
    fn closed_form_matches_the_numerical_flow() {
        for seed in [1, 2, 3, 5] {
            let state = random_state(seed);
            let err = max_flow_error(&state, 5.0, 101);
            assert!(err < 1e-6, "seed {seed}: closed form deviates by {err}");
        }
    }

    #[test]
    fn angle_rates_agree_with_the_direct_equations() {
        let state = random_state(7);
        let sol = solve_n2(&state).unwrap();
        for i in 0..40 {
            let t = 0.125 * i as f64;
            let xi = sol.xi(t);
            let sigma = xi[0] * xi[0] + xi[1] * xi[1];
            let (da, db) =
                angles_rhs(&[xi], &[sol.lambda1], sigma, sol.a, sol.c2, t).unwrap();
            let (ra, rb) = sol.angle_rates(t);
            assert!((ra - da[0]).abs() < 1e-9, "t = {t}: alpha rate {ra} vs {}", da[0]);
            assert!((rb - db[0]).abs() < 1e-9, "t = {t}: beta rate {rb} vs {}", db[0]);
        }
    }

    #[test]
    fn angles_differentiate_to_the_rates() {
        let state = random_state(9);
        let sol = solve_n2(&state).unwrap();
        let h = 1e-5;
        for i in 1..20 {
            let t = 0.25 * i as f64;
            let (ap, bp) = sol.angles(t + h);
            let (am, bm) = sol.angles(t - h);
            let (ra, rb) = sol.angle_rates(t);
            assert!(((ap - am) / (2.0 * h) - ra).abs() < 1e-5);
            assert!(((bp - bm) / (2.0 * h) - rb).abs() < 1e-5);
        }
    }

    #[test]
    fn invariants_hold_along_the_closed_form() {
        let state = random_state(11);
        let sol = solve_n2(&state).unwrap();
        let times: Vec<f64> = (0..100).map(|i| 0.05 * i as f64).collect();
        let report = n2_invariant_checks(&sol, &times);
        assert!(
            report.max_residual() < 1e-8,
            "residuals: {} / {}",
            report.max_norm_residual,
            report.max_area_residual
        );
        // The stated relation between the constants holds as well.
        let nu = sol.a * sol.a - sol.lambda1 * sol.lambda1;
        let relation = sol.r1 * sol.r1 - nu * sol.rho * sol.rho - sol.c1 * sol.c1;
        assert!(relation.abs() < 1e-12);
    }

    #[test]
    fn vanishing_quadratic_form_advances_linearly() {
        // z^T z = 0 while conj(z)^T z > 0.
        let state = ComplexState {
            z: DVector::from_vec(vec![
                Complex64::new(0.6, 0.0),
                Complex64::new(0.0, 0.6),
            ]),
            a: 0.4,
            delta: {
                let mut d = Mat::zeros(2, 2);
                d[(0, 1)] = 0.7;
                d
            },
        };
        let sol = solve_n2(&state).unwrap();
        assert_eq!(sol.mode(), N2Mode::RhoZero);
        assert!(sol.rho < 1e-12);
        let (a1, b1) = sol.angles(1.0);
        let (a2, b2) = sol.angles(2.0);
        assert!((a2 - sol.alpha0 - 2.0 * (a1 - sol.alpha0)).abs() < 1e-12);
        assert!((b2 - sol.beta0 - 2.0 * (b1 - sol.beta0)).abs() < 1e-12);
        let err = max_flow_error(&state, 5.0, 101);
        assert!(err < 1e-6, "rho = 0 closed form deviates by {err}");
    }

    #[test]
    fn frozen_frame_phase_is_handled() {
        // With a = 0 and no trailing block the state is a fixed point:
        // omega_1 = 0 and both angle rates vanish.
        let state = ComplexState {
            z: DVector::from_vec(vec![
                Complex64::new(0.5, 0.2),
                Complex64::new(-0.1, 0.45),
            ]),
            a: 0.0,
            delta: Mat::zeros(2, 2),
        };
        let sol = solve_n2(&state).unwrap();
        assert_eq!(sol.mode(), N2Mode::OmegaZero);
        for t in [0.5, 2.5, 5.0] {
            let z = sol.eval(t);
            for i in 0..2 {
                assert!((z[i] - state.z[i]).norm() < 1e-12);
            }
        }
        let err = max_flow_error(&state, 5.0, 21);
        assert!(err < 1e-9);
    }

    #[test]
    fn degenerate_modulus_is_rejected() {
        // A common complex phase times a real vector saturates
        // |z^T z| = conj(z)^T z.
        let phase = Complex64::from_polar(1.0, 0.9);
        let state = ComplexState {
            z: DVector::from_vec(vec![phase * 0.5, phase * -0.3]),
            a: 0.3,
            delta: {
                let mut d = Mat::zeros(2, 2);
                d[(0, 1)] = 0.4;
                d
            },
        };
        assert!(matches!(solve_n2(&state), Err(Error::Degenerate(_))));
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let state = ComplexState {
            z: DVector::from_element(3, Complex64::new(0.1, 0.2)),
            a: 0.2,
            delta: Mat::zeros(3, 3),
        };
        assert!(matches!(solve_n2(&state), Err(Error::ShapeMismatch(_))));
    }
}
