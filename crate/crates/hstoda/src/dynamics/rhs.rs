//! Right-hand sides of the Hamilton equations in each chart of the cubic
//! flow pipeline, plus the general block-coordinate equations for any
//! Hamiltonian on the strictly upper chart.

use super::state::{component_scalars, BlockState, ComplexState, ReducedState, RotatedState};
use crate::error::{Error, Result};
use crate::invariants::block_integral_poly;
use crate::op::{strictly_upper, Mat};
use crate::poisson::ScalarField;
use nalgebra::{DVector, Vector2};
use num_complex::Complex64;

/// The Hamiltonian generating the cubic flow: `(h1 - h4)/2 + h2^2` in terms
/// of the block integrals, as an exact polynomial on the upper chart.
pub fn cubic_hamiltonian(n: usize) -> Result<ScalarField> {
    let h1 = block_integral_poly(n, 1)?;
    let h2 = block_integral_poly(n, 2)?;
    let h4 = block_integral_poly(n, 4)?;
    Ok(h1
        .add(&h4.scale(-1.0))
        .scale(0.5)
        .add(&h2.square())
        .into_field())
}

/// Hamilton equations of `h` in block coordinates. With `K` the skew part
/// of the trailing block and `W` the skew part of the `delta`-gradient:
///
/// ```text
/// da/dt     = y.h_x - x.h_y
/// dx/dt     = -h_a y + K h_x + a h_y - W x
/// dy/dt     =  h_a x + K h_y - a h_x - W y
/// ddelta/dt = upper(M - M^T),  M = h_x x^T + h_y y^T + [delta, W]
/// ```
///
/// This is the strictly upper Hamiltonian vector field of the undeformed
/// (all-ones) table written in block form.
pub fn block_rhs(state: &BlockState, h: &ScalarField) -> Result<BlockState> {
    state.validate()?;
    let n = state.n_size();
    let packed = state.pack();
    if h.dim() != packed.len() {
        return Err(Error::ShapeMismatch(format!(
            "hamiltonian dimension {} does not match chart dimension {}",
            h.dim(),
            packed.len()
        )));
    }
    let grad = BlockState::unpack(n, &h.gradient(&packed))?;
    let k = &state.delta - state.delta.transpose();
    let w = &grad.delta - grad.delta.transpose();
    let da = state.y.dot(&grad.x) - state.x.dot(&grad.y);
    let dx = &state.y * (-grad.a) + &k * &grad.x + &grad.y * state.a - &w * &state.x;
    let dy = &state.x * grad.a + &k * &grad.y - &grad.x * state.a - &w * &state.y;
    let m = &grad.x * state.x.transpose()
        + &grad.y * state.y.transpose()
        + &state.delta * &w
        - &w * &state.delta;
    let ddelta = strictly_upper(&(&m - m.transpose()));
    Ok(BlockState {
        a: da,
        x: dx,
        y: dy,
        delta: ddelta,
    })
}

fn real_mat_complex_vec(m: &Mat, v: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_fn(v.len(), |i, _| {
        (0..v.len()).map(|j| v[j] * m[(i, j)]).sum::<Complex64>()
    })
}

/// The complex form of the block equations for the vector part:
/// `dz/dt = (-W + i h_a) z + (K - i a)(h_x + i h_y)`. The gradients are read
/// from the real Hamiltonian on the upper chart at the corresponding block
/// point.
pub fn complex_rhs(state: &ComplexState, h: &ScalarField) -> Result<DVector<Complex64>> {
    let block = state.to_block();
    let grad = BlockState::unpack(block.n_size(), &h.gradient(&block.pack()))?;
    let w = &grad.delta - grad.delta.transpose();
    let k = state.skew();
    let hxy = DVector::from_fn(state.z.len(), |j, _| Complex64::new(grad.x[j], grad.y[j]));
    let mut dz = real_mat_complex_vec(&k, &hxy) - &hxy * Complex64::new(0.0, state.a);
    dz -= real_mat_complex_vec(&w, &state.z);
    dz += &state.z * Complex64::new(0.0, grad.a);
    Ok(dz)
}

/// The cubic flow in closed form:
/// `dz/dt = 2[(1 + c2) K z - i a (1 + c2) z - (z^T z)(K - i a) conj(z)]`.
///
/// `c2` is the conserved value of `conj(z)^T z`, frozen from the initial
/// data and substituted into the right-hand side as a parameter.
pub fn cubic_rhs(state: &ComplexState, c2: f64) -> DVector<Complex64> {
    let k = state.skew();
    let quad = state.zt_z();
    let zbar = state.z.map(|c| c.conj());
    let ia = Complex64::new(0.0, state.a);
    let mut dz = real_mat_complex_vec(&k, &state.z) * Complex64::from(1.0 + c2);
    dz -= &state.z * (ia * (1.0 + c2));
    dz -= (real_mat_complex_vec(&k, &zbar) - &zbar * ia) * quad;
    dz * Complex64::from(2.0)
}

fn eps(v: &Vector2<Complex64>) -> Vector2<Complex64> {
    Vector2::new(v[1], -v[0])
}

/// Tangent of a reduced point: per-block vectors and the optional scalar.
#[derive(Debug, Clone)]
pub struct ReducedTangent {
    pub xi: Vec<Vector2<Complex64>>,
    pub xi0: Option<Complex64>,
}

/// The cubic flow conjugated into the normal-form frame:
///
/// ```text
/// (1/2) dxi_k/dt = lambda_k (1+c2) eps xi_k - i a (1+c2) xi_k
///                  - S (lambda_k eps - i a) conj(xi_k)
/// (1/2) dxi_0/dt = -i a (1+c2) xi_0 + i a S conj(xi_0)
/// ```
///
/// with `S = z^T z` computed from the state and `c2` passed as a parameter.
pub fn reduced_rhs(state: &ReducedState, a: f64, c2: f64) -> ReducedTangent {
    let s = state.quad_sum();
    let ia = Complex64::new(0.0, a);
    let xi = state
        .xi
        .iter()
        .zip(&state.lambdas)
        .map(|(v, &lam)| {
            let vbar = Vector2::new(v[0].conj(), v[1].conj());
            let term = eps(v) * Complex64::from(lam * (1.0 + c2))
                - v * (ia * (1.0 + c2))
                - (eps(&vbar) * Complex64::from(lam) - vbar * ia) * s;
            term * Complex64::from(2.0)
        })
        .collect();
    let xi0 = state.xi0.map(|x0| {
        (x0 * (-ia) * (1.0 + c2) + x0.conj() * ia * s) * 2.0
    });
    ReducedTangent { xi, xi0 }
}

/// Frequency denominators `nu = a^2 - lambda^2` for every component of a
/// reduced point (the scalar component has `lambda = 0`).
pub fn nu_values(state: &ReducedState, a: f64) -> Vec<f64> {
    let mut nus: Vec<f64> = state.lambdas.iter().map(|l| a * a - l * l).collect();
    if state.xi0.is_some() {
        nus.push(a * a);
    }
    nus
}

/// Rotating-frame equations with the invariants `c2` and `rho` inlined:
///
/// ```text
/// dq_k/dt = 4 p_k sum(r)          dp_k/dt = -4 q_k sum(r) + 4 rho r_k
/// dr_k/dt = 4 rho nu_k p_k        dphi/dt = -4 a (1+c2) + 4 sum(r)
/// ```
pub fn rotated_rhs(state: &RotatedState, a: f64, c2: f64, rho: f64, nus: &[f64]) -> RotatedState {
    let sum_r: f64 = state.r.iter().sum();
    let q = state.p.iter().map(|&p| 4.0 * p * sum_r).collect();
    let p = state
        .q
        .iter()
        .zip(&state.r)
        .map(|(&q, &r)| -4.0 * q * sum_r + 4.0 * rho * r)
        .collect();
    let r = state
        .p
        .iter()
        .zip(nus)
        .map(|(&p, &nu)| 4.0 * rho * nu * p)
        .collect();
    RotatedState {
        q,
        p,
        r,
        phi: phase_rhs(state, a, c2),
    }
}

/// Phase advance of the rotating frame.
pub fn phase_rhs(state: &RotatedState, a: f64, c2: f64) -> f64 {
    -4.0 * a * (1.0 + c2) + 4.0 * state.r.iter().sum::<f64>()
}

/// Angle rates of the polar parameterization
/// `xi = sqrt(A)(cos alpha, sin alpha) + i sqrt(B)(cos beta, sin beta)`
/// per 2x2 block. With the component scalars `P`, `D` and
/// `sigma = sum eta_l`:
///
/// ```text
/// dalpha = -2 lam (1+c2) + 2 lam Re(sigma)
///          + [2 a D Re(sigma) + 2 lam P Im(sigma)] / A + 2 a (1+c2) D / A
/// dbeta  = -2 lam (1+c2) - 2 lam Re(sigma)
///          + [2 lam P Im(sigma) - 2 a D Re(sigma)] / B + 2 a (1+c2) D / B
/// ```
///
/// Errors when a squared amplitude falls below `1e-10` (the parameterization
/// degenerates); `t` is reported in the error.
pub fn angles_rhs(
    xi: &[Vector2<Complex64>],
    lambdas: &[f64],
    sigma: Complex64,
    a: f64,
    c2: f64,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut dalpha = Vec::with_capacity(xi.len());
    let mut dbeta = Vec::with_capacity(xi.len());
    for (v, &lam) in xi.iter().zip(lambdas) {
        let s = component_scalars(v);
        let big_a = v[0].re * v[0].re + v[1].re * v[1].re;
        let big_b = v[0].im * v[0].im + v[1].im * v[1].im;
        if big_a < 1e-10 || big_b < 1e-10 {
            return Err(Error::SingularConfiguration {
                t,
                reason: "angle parameterization degenerates (amplitude below 1e-10)".into(),
            });
        }
        let common = -2.0 * lam * (1.0 + c2);
        dalpha.push(
            common
                + 2.0 * lam * sigma.re
                + (2.0 * a * s.d * sigma.re + 2.0 * lam * s.p * sigma.im) / big_a
                + 2.0 * a * (1.0 + c2) * s.d / big_a,
        );
        dbeta.push(
            common - 2.0 * lam * sigma.re
                + (2.0 * lam * s.p * sigma.im - 2.0 * a * s.d * sigma.re) / big_b
                + 2.0 * a * (1.0 + c2) * s.d / big_b,
        );
    }
    Ok((dalpha, dbeta))
}
