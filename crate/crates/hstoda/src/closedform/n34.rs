//! Quadrature solution for one genuine 2x2 block coupled to one further
//! component — either a second block (complex dimension four) or the odd
//! scalar (complex dimension three).
//!
//! In the rotating frame the linear invariants leave a single degree of
//! freedom: the signed radius `r_1` of the leading block. Its out-of-phase
//! coordinate squares to a quartic, `p_1^2 = e + w4(r_1)` (see
//! [`super::quartic`]), so `r_1` oscillates between two adjacent simple
//! roots of the radicand:
//!
//! ```text
//! dr_1/dt = 4 rho nu_1 p_1 = ± 4 rho nu_1 sqrt(e + w4(r_1)).
//! ```
//!
//! The solver brackets the oscillation band, removes the two band roots
//! from the radicand by synthetic division (so the substitution
//! `r_1 = mid - w cos(theta)` makes the time integrand regular), and
//! tabulates cumulative quadratures of `dt/dtheta` and `r_1 dt/dtheta`
//! over a half period. Every other coordinate is then reconstructed
//! algebraically from `r_1` and the running integral of `r_1`:
//! the partner radius and the in-phase coordinates by linear/quadratic
//! invariants, the frame phase by integrating its rate, the per-component
//! quadratic forms from the frame phase, the block angles by integrating
//! their rational rates, and the odd scalar as a branch-tracked square
//! root of its quadratic form.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dynamics::{ReducedState, RotatedState};
use crate::error::{Error, Result};
use crate::numeric::{adaptive_integral, CumulativeQuadrature};
use crate::op::Mat;

use super::quartic::{validate_frequencies, QuarticData};
use super::{block_amplitudes, scalar_angle_rates, xi_from_angles};

/// Accuracy target of the cumulative quadrature tables.
const TABLE_TOL: f64 = 1e-12;
/// Accuracy target of the per-segment angle quadratures.
const ANGLE_TOL: f64 = 1e-11;

/// Rotating-frame scalars of the two-component system at one time.
/// Component `1` is the leading block; component `k` is the partner
/// (second block or odd scalar).
#[derive(Debug, Clone, Copy)]
pub struct FrameScalars {
    /// Signed radius of the leading block.
    pub r1: f64,
    /// Out-of-phase coordinate of the leading block.
    pub p1: f64,
    /// In-phase coordinate of the leading block.
    pub q1: f64,
    /// Signed radius of the partner component.
    pub r_k: f64,
    /// Out-of-phase coordinate of the partner component.
    pub p_k: f64,
    /// In-phase coordinate of the partner component.
    pub q_k: f64,
    /// Frame phase.
    pub phi: f64,
    /// Running integral of `r1` from time zero.
    pub int_r1: f64,
}

/// Immutable quadrature evaluator for the two-component systems.
#[derive(Debug, Clone)]
pub struct N34Solution {
    a: f64,
    c2: f64,
    rho: f64,
    nu1: f64,
    /// `lambda_k^2 - lambda_1^2`.
    lam_gap: f64,
    /// `nu_k f`: the radius sum at `r_1 = 0`.
    cap_f: f64,
    /// `g - rho^2 nu_k`.
    cap_g: f64,
    /// Radius rate factor `4 rho nu_1`.
    kappa: f64,
    data: QuarticData,
    /// Oscillation band of `r_1` (adjacent simple roots of the radicand).
    r_lo: f64,
    r_hi: f64,
    mid: f64,
    half_width: f64,
    /// Radicand with the band roots divided out (positive on the band),
    /// `rest[i]` multiplying `r^i`.
    rest: [f64; 3],
    /// Time to sweep the band once, and the full period.
    t_half: f64,
    period: f64,
    /// Integral of `r_1 dt` over one upward sweep.
    r_half: f64,
    /// Clock position of the initial point and the integral of `r_1`
    /// accumulated up to it.
    u0: f64,
    int_r_u0: f64,
    phi0: f64,
    time_table: CumulativeQuadrature,
    r_table: CumulativeQuadrature,
    // Frame data for reconstructing full states.
    lambdas: Vec<f64>,
    o: Mat,
    c_blocks: Vec<f64>,
    alpha0: Vec<f64>,
    beta0: Vec<f64>,
    xi0_init: Option<Complex64>,
    /// Crude bound on the winding speed of the scalar's quadratic form,
    /// used to pick substeps for square-root branch tracking.
    phase_bound: f64,
}

/// Builds the quadrature evaluator from a reduced point: one block plus a
/// second block, or one block plus the scalar component.
///
/// Degenerate configurations are rejected: coincident frequencies
/// (`lambda_k^2 = lambda_1^2`, `a^2 = lambda_1^2`, or `a^2 = lambda_k^2`),
/// a vanishing frame radius, and repeated roots of the radicand at the
/// oscillation band (all with threshold 1e-10).
pub fn solve_n34(state: &ReducedState, a: f64) -> Result<N34Solution> {
    let two_blocks = state.xi.len() == 2 && state.xi0.is_none();
    let block_and_scalar = state.xi.len() == 1 && state.xi0.is_some();
    if !(two_blocks || block_and_scalar) {
        return Err(Error::ShapeMismatch(
            "quadrature solution requires one block plus either a second block or the scalar"
                .into(),
        ));
    }
    let lambda1 = state.lambdas[0];
    let lambda_k = if two_blocks { state.lambdas[1] } else { 0.0 };
    let c2 = state.c2();
    let rot = RotatedState::from_reduced(state, a);
    let rho = rot.rho();
    let (nu1, nu_k, lam_gap) = validate_frequencies(a, lambda1, lambda_k, rho)?;

    // Conserved frame quantities from the initial point.
    let f = rot.r[0] / nu1 + rot.r[1] / nu_k;
    let sum_r = rot.r[0] + rot.r[1];
    let g = rho * (nu1 * rot.q[0] + nu_k * rot.q[1]) - 0.5 * sum_r * sum_r;
    let r1_init = rot.r[0];
    let p1_init = rot.p[0];
    let data =
        QuarticData::from_invariants(a, lambda1, lambda_k, rho, f, g, r1_init, p1_init)?;

    // Bracket the oscillation band around the initial radius. The slack
    // absorbs evaluation roundoff of the radicand near the initial point
    // (its coefficients can be large while in-band values are tiny), so a
    // start exactly at a band root is still classified as inside.
    let coeffs = data.radicand_coefficients();
    let eval_scale = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.abs() * r1_init.abs().powi(i as i32))
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let slack = 1e-12 * eval_scale;
    let scale = 1.0 + r1_init.abs();
    let r_hi = adjacent_root(&data, r1_init, 1.0, scale, slack)?;
    let r_lo = adjacent_root(&data, r1_init, -1.0, scale, slack)?;
    if r_hi - r_lo < 1e-10 * (1.0 + r_lo.abs().max(r_hi.abs())) {
        return Err(Error::Degenerate(format!(
            "radicand roots coincide near r_1 = {r_lo}: the radius band collapses"
        )));
    }
    let rest = deflate(data.radicand_coefficients(), r_lo, r_hi);
    let mid = 0.5 * (r_lo + r_hi);
    let half_width = 0.5 * (r_hi - r_lo);
    for i in 0..=32 {
        let r = r_lo + (r_hi - r_lo) * i as f64 / 32.0;
        if rest[0] + r * (rest[1] + r * rest[2]) <= 0.0 {
            return Err(Error::Degenerate(format!(
                "radicand has interior roots inside the radius band at r_1 = {r}"
            )));
        }
    }

    let kappa = 4.0 * rho * nu1;
    let cap_f = nu_k * f;
    let cap_g = g - rho * rho * nu_k;

    let mut solution = N34Solution {
        a,
        c2,
        rho,
        nu1,
        lam_gap,
        cap_f,
        cap_g,
        kappa,
        data,
        r_lo,
        r_hi,
        mid,
        half_width,
        rest,
        t_half: 0.0,
        period: 0.0,
        r_half: 0.0,
        u0: 0.0,
        int_r_u0: 0.0,
        phi0: rot.phi,
        time_table: CumulativeQuadrature::build(&|_| 1.0, 0.0, 1.0, 1.0),
        r_table: CumulativeQuadrature::build(&|_| 1.0, 0.0, 1.0, 1.0),
        lambdas: state.lambdas.clone(),
        o: state.o.clone(),
        c_blocks: state.block_invariants(a),
        alpha0: state
            .xi
            .iter()
            .map(|v| f64::atan2(v[1].re, v[0].re))
            .collect(),
        beta0: state
            .xi
            .iter()
            .map(|v| f64::atan2(v[1].im, v[0].im))
            .collect(),
        xi0_init: state.xi0,
        phase_bound: 0.0,
    };

    // Clock tables over the half sweep theta in [0, pi].
    solution.time_table = {
        let f = |theta: f64| solution.dt_dtheta(theta);
        CumulativeQuadrature::build(&f, 0.0, PI, TABLE_TOL)
    };
    solution.t_half = solution.time_table.total();
    if !(solution.t_half.is_finite() && solution.t_half > 0.0) {
        return Err(Error::Degenerate(
            "half-period quadrature diverges: radicand nearly singular on the band".into(),
        ));
    }
    solution.period = 2.0 * solution.t_half;
    solution.r_table = {
        let f = |theta: f64| solution.r_weight(theta);
        CumulativeQuadrature::build(&f, 0.0, PI, TABLE_TOL)
    };
    solution.r_half = solution.r_table.total();

    // Place the initial point on the clock.
    let theta0 = ((solution.mid - r1_init) / solution.half_width)
        .clamp(-1.0, 1.0)
        .acos();
    let tau0 = {
        let f = |theta: f64| solution.dt_dtheta(theta);
        solution.time_table.eval(&f, theta0)
    };
    solution.u0 = if p1_init * kappa >= 0.0 {
        tau0
    } else {
        solution.period - tau0
    };
    solution.int_r_u0 = solution.unfolded_r_integral(solution.u0);

    let r_extreme = solution.r_lo.abs().max(solution.r_hi.abs());
    solution.phase_bound = 2.0
        * ((4.0 * cap_f - 4.0 * a * (1.0 + c2)).abs()
            + 4.0 * (lam_gap / nu1).abs() * r_extreme)
        + 20.0;

    Ok(solution)
}

/// Finds the band root of the radicand adjacent to `start` in direction
/// `dir`: marches outward to a sign change, bisects, verifies that no
/// earlier sign dip was jumped over (re-bracketing if one was), and
/// Newton-polishes the result.
fn adjacent_root(
    data: &QuarticData,
    start: f64,
    dir: f64,
    scale: f64,
    slack: f64,
) -> Result<f64> {
    let mut outside = march(data, start, dir, scale, slack)?;
    for _ in 0..8 {
        let root = refine(data, start, outside, slack);
        // A large march step can overshoot a narrow negative lobe; accept
        // the root only if the radicand stays nonnegative up to it.
        let overshoot = (1..32)
            .map(|i| start + (root - start) * i as f64 / 32.0)
            .find(|&r| data.radicand(r) < -slack);
        match overshoot {
            Some(r) => outside = r,
            None => return Ok(polish_root(data, root, start)),
        }
    }
    Err(Error::Degenerate(
        "radius band bracketing did not isolate an adjacent radicand root".into(),
    ))
}

/// Walks outward from `start` (inside the band) until the radicand is
/// decisively negative; returns the first outside point.
fn march(data: &QuarticData, start: f64, dir: f64, scale: f64, slack: f64) -> Result<f64> {
    let mut step = 0.05 * scale;
    let mut at = start;
    for _ in 0..300 {
        let next = at + dir * step;
        if data.radicand(next) < -slack {
            return Ok(next);
        }
        at = next;
        step *= 1.4;
    }
    Err(Error::Degenerate(
        "radius band is unbounded: the radicand never turns negative".into(),
    ))
}

/// Bisects a band root between `inside` (radicand >= -slack) and `outside`.
fn refine(data: &QuarticData, mut inside: f64, mut outside: f64, slack: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if data.radicand(mid) >= -slack {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (inside + outside)
}

/// Newton-polishes a band root so the factorized radicand matches the
/// original to roundoff; without this, bisection against the slack
/// tolerance leaves a relative distortion that matters when the band is
/// narrow. The step toward `anchor` is left unguarded: near a simple root
/// Newton contracts immediately.
fn polish_root(data: &QuarticData, mut root: f64, anchor: f64) -> f64 {
    for _ in 0..6 {
        let derivative = data.radicand_derivative(root);
        if derivative == 0.0 {
            break;
        }
        let next = root - data.radicand(root) / derivative;
        if !next.is_finite() || (next - anchor).abs() > 2.0 * (root - anchor).abs() + 1.0 {
            break;
        }
        root = next;
    }
    root
}

/// Divides the two band roots out of the radicand by synthetic division,
/// returning the negated quotient, which is positive on the band:
/// `radicand(r) = (r - r_lo)(r_hi - r) (rest[0] + rest[1] r + rest[2] r^2)`.
fn deflate(coefficients: [f64; 5], r_lo: f64, r_hi: f64) -> [f64; 3] {
    let [_, _, a2, a3, a4] = coefficients;
    let b3 = a4;
    let b2 = a3 + r_lo * b3;
    let b1 = a2 + r_lo * b2;
    let d2 = b3;
    let d1 = b2 + r_hi * d2;
    let d0 = b1 + r_hi * d1;
    [-d0, -d1, -d2]
}

impl N34Solution {
    /// The radius oscillation band `(r_lo, r_hi)`.
    pub fn band(&self) -> (f64, f64) {
        (self.r_lo, self.r_hi)
    }

    /// The full oscillation period of the radius.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// The quartic data underlying the quadrature.
    pub fn quartic(&self) -> &QuarticData {
        &self.data
    }

    /// First time `t > 0` at which the radius reaches a band endpoint and
    /// its velocity reflects.
    pub fn first_turning_time(&self) -> f64 {
        let rem = self.u0.rem_euclid(self.t_half);
        let dt = self.t_half - rem;
        if dt <= 1e-14 * self.t_half {
            self.t_half
        } else {
            dt
        }
    }

    fn rest_at(&self, r: f64) -> f64 {
        self.rest[0] + r * (self.rest[1] + r * self.rest[2])
    }

    fn r_of_theta(&self, theta: f64) -> f64 {
        self.mid - self.half_width * theta.cos()
    }

    /// `dt/dtheta` along an upward sweep; regular on [0, pi] because the
    /// band roots have been divided out of the radicand.
    fn dt_dtheta(&self, theta: f64) -> f64 {
        let rest = self.rest_at(self.r_of_theta(theta)).max(f64::MIN_POSITIVE);
        1.0 / (self.kappa.abs() * rest.sqrt())
    }

    fn r_weight(&self, theta: f64) -> f64 {
        self.r_of_theta(theta) * self.dt_dtheta(theta)
    }

    /// Folds a clock position into the sweep angle, the sweep direction,
    /// and the whole-period count.
    fn fold(&self, x: f64) -> (f64, bool, f64) {
        let cycles = (x / self.period).floor();
        let within = (x - cycles * self.period).clamp(0.0, self.period);
        let f = |theta: f64| self.dt_dtheta(theta);
        if within <= self.t_half {
            (self.time_table.invert(&f, within), true, cycles)
        } else {
            (
                self.time_table.invert(&f, self.period - within),
                false,
                cycles,
            )
        }
    }

    /// Integral of `r_1 dt` from clock position zero to `x`.
    fn unfolded_r_integral(&self, x: f64) -> f64 {
        let (theta, upward, cycles) = self.fold(x);
        let f = |th: f64| self.r_weight(th);
        let leg = self.r_table.eval(&f, theta);
        let within = if upward {
            leg
        } else {
            2.0 * self.r_half - leg
        };
        cycles * 2.0 * self.r_half + within
    }

    /// Rotating-frame scalars at time `t`.
    pub fn scalars_at(&self, t: f64) -> FrameScalars {
        let x = self.u0 + t;
        let (theta, upward, cycles) = self.fold(x);
        let r1 = self.r_of_theta(theta);
        let magnitude =
            self.half_width * theta.sin() * self.rest_at(r1).max(0.0).sqrt();
        let sign = if upward {
            self.kappa.signum()
        } else {
            -self.kappa.signum()
        };
        let p1 = sign * magnitude;
        let sum_r = self.cap_f + self.lam_gap / self.nu1 * r1;
        let q1 = (self.cap_g + 0.5 * sum_r * sum_r) / (self.rho * self.lam_gap);

        let f = |th: f64| self.r_weight(th);
        let leg = self.r_table.eval(&f, theta);
        let within = if upward {
            leg
        } else {
            2.0 * self.r_half - leg
        };
        let int_r1 = cycles * 2.0 * self.r_half + within - self.int_r_u0;
        let phi = self.phi0
            + (4.0 * self.cap_f - 4.0 * self.a * (1.0 + self.c2)) * t
            + 4.0 * self.lam_gap / self.nu1 * int_r1;
        FrameScalars {
            r1,
            p1,
            q1,
            r_k: sum_r - r1,
            p_k: -p1,
            q_k: self.rho - q1,
            phi,
            int_r1,
        }
    }

    /// The quadratic form of the partner component, `eta_k = e^{i phi}(q_k + i p_k)`.
    fn partner_eta(&self, t: f64) -> Complex64 {
        let sc = self.scalars_at(t);
        Complex64::from_polar(1.0, sc.phi) * Complex64::new(sc.q_k, sc.p_k)
    }

    /// Angle velocities `(d alpha/dt, d beta/dt)` of each stored block.
    fn block_rates_at(&self, t: f64) -> Result<Vec<(f64, f64)>> {
        let sc = self.scalars_at(t);
        let rot = Complex64::from_polar(1.0, sc.phi);
        // sum q = rho and sum p = 0, so the component sum is rho e^{i phi}.
        let sigma = rot * self.rho;
        let mut rates = Vec::with_capacity(self.lambdas.len());
        for (j, &lambda) in self.lambdas.iter().enumerate() {
            let (q, p, r) = if j == 0 {
                (sc.q1, sc.p1, sc.r1)
            } else {
                (sc.q_k, sc.p_k, sc.r_k)
            };
            let eta = rot * Complex64::new(q, p);
            rates.push(scalar_angle_rates(
                lambda,
                self.c_blocks[j],
                self.a,
                self.c2,
                eta,
                r,
                sigma,
                t,
            )?);
        }
        Ok(rates)
    }

    /// Evaluates the solution on the given non-decreasing time grid,
    /// returning full reduced states. Angle quadratures accumulate from
    /// time zero, so widely spaced grids remain accurate; the scalar's
    /// square-root branch is tracked continuously between grid points.
    pub fn sample(&self, times: &[f64]) -> Result<Vec<ReducedState>> {
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config(
                "sample times must be non-decreasing".into(),
            ));
        }
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let blocks = self.lambdas.len();
        let mut alphas = self.alpha0.clone();
        let mut betas = self.beta0.clone();
        let mut xi0 = self.xi0_init;
        let mut cursor = 0.0_f64;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            for j in 0..blocks {
                let rate_alpha = |s: f64| match self.block_rates_at(s) {
                    Ok(r) => r[j].0,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                };
                let rate_beta = |s: f64| match self.block_rates_at(s) {
                    Ok(r) => r[j].1,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                };
                alphas[j] += adaptive_integral(&rate_alpha, cursor, t, ANGLE_TOL);
                betas[j] += adaptive_integral(&rate_beta, cursor, t, ANGLE_TOL);
            }
            if let Some(e) = failure.borrow_mut().take() {
                return Err(e);
            }
            if let Some(previous) = xi0 {
                // Walk the square root of the scalar's quadratic form in
                // steps small enough that the correct branch is the nearer
                // of the two.
                let steps = (((t - cursor).abs() * self.phase_bound / 2.0).ceil() as usize)
                    .max(1);
                let mut current = previous;
                for k in 1..=steps {
                    let s = cursor + (t - cursor) * k as f64 / steps as f64;
                    let root = self.partner_eta(s).sqrt();
                    current = if (root - current).norm() <= (-root - current).norm() {
                        root
                    } else {
                        -root
                    };
                }
                xi0 = Some(current);
            }
            cursor = t;

            let sc = self.scalars_at(t);
            let rot = Complex64::from_polar(1.0, sc.phi);
            let mut xi = Vec::with_capacity(blocks);
            for j in 0..blocks {
                let (q, p, r) = if j == 0 {
                    (sc.q1, sc.p1, sc.r1)
                } else {
                    (sc.q_k, sc.p_k, sc.r_k)
                };
                let eta = rot * Complex64::new(q, p);
                let amp =
                    block_amplitudes(self.lambdas[j], self.c_blocks[j], self.a, eta, r)?;
                xi.push(xi_from_angles(amp.big_a, amp.big_b, alphas[j], betas[j]));
            }
            out.push(ReducedState {
                xi,
                xi0,
                lambdas: self.lambdas.clone(),
                o: self.o.clone(),
            });
        }
        Ok(out)
    }
}
