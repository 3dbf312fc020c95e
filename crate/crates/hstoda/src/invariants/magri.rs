//! Bi-Hamiltonian families from a compatible pencil of deformation
//! sequences: the coefficients of the parameter expansion of the blended
//! spectral invariants, which are in involution with respect to both member
//! brackets, plus the closed combinations available for the one-parameter
//! pencil used throughout the examples.

use super::block::block_integral_poly;
use super::spectral::quadratic_kernel_field;
use crate::error::{Error, Result};
use crate::op::{build_alpha, DeformationSequence};
use crate::poisson::{pencil_classify, PencilVerdict, ScalarField};
use nalgebra::{DMatrix, DVector};

/// Blended weights of the pencil at parameter `eps`:
/// `eta = eta_a + eps eta_b`, `delta = delta_a + eps delta_b`,
/// `tail = (1 + eps)(tail_a + eps tail_b)`.
fn blended_weights(
    a: &DeformationSequence,
    b: &DeformationSequence,
    eps: f64,
) -> (Vec<f64>, Vec<f64>, f64) {
    let (ta, tb) = (build_alpha(a), build_alpha(b));
    let eta: Vec<f64> = ta
        .eta()
        .iter()
        .zip(tb.eta())
        .map(|(u, v)| u + eps * v)
        .collect();
    let delta: Vec<f64> = ta
        .delta()
        .iter()
        .zip(tb.delta())
        .map(|(u, v)| u + eps * v)
        .collect();
    let tail = (1.0 + eps) * (ta.tail() + eps * tb.tail());
    (eta, delta, tail)
}

fn check_pencil(a: &DeformationSequence, b: &DeformationSequence) -> Result<()> {
    if a.n_size() != b.n_size() {
        return Err(Error::ShapeMismatch(format!(
            "pencil members must have equal size, got {} and {}",
            a.n_size(),
            b.n_size()
        )));
    }
    match pencil_classify(a, b)? {
        PencilVerdict::Pass { .. } => Ok(()),
        PencilVerdict::Fail { witness: (i, j) } => Err(Error::InvalidPencil { i, j }),
    }
}

/// Weights `w` such that the coefficient of `eps^nth` in a polynomial of
/// degree `<= 2k` equals `sum_j w_j p(eps_j)` over the integer nodes
/// `eps_j = -k..=k`.
fn coefficient_weights(k: usize, nth: usize) -> (Vec<f64>, DVector<f64>) {
    let deg = 2 * k;
    let nodes: Vec<f64> = (-(k as i64)..=k as i64).map(|j| j as f64).collect();
    let v = DMatrix::from_fn(deg + 1, deg + 1, |r, c| nodes[r].powi(c as i32));
    let inv = v.try_inverse().expect("distinct integer nodes");
    let w = DVector::from_fn(deg + 1, |j, _| inv[(nth, j)]);
    (nodes, w)
}

/// The `nth` expansion coefficient (in the pencil parameter) of the blended
/// spectral invariant `tr(M_eps^k)`, as a field with analytic gradient.
///
/// Requires a compatible pencil; `nth` must not exceed the degree `2k`.
pub fn magri_field(
    a: &DeformationSequence,
    b: &DeformationSequence,
    k: usize,
    nth: usize,
) -> Result<ScalarField> {
    check_pencil(a, b)?;
    if nth > 2 * k {
        return Err(Error::IndexOutOfRange(format!(
            "coefficient index {nth} exceeds expansion degree {}",
            2 * k
        )));
    }
    let n = a.n_size();
    let (nodes, w) = coefficient_weights(k, nth);
    let members: std::sync::Arc<Vec<ScalarField>> = std::sync::Arc::new(
        nodes
            .iter()
            .map(|&eps| {
                let (eta, delta, tail) = blended_weights(a, b, eps);
                quadratic_kernel_field(n, k, eta, delta, tail)
            })
            .collect::<Result<_>>()?,
    );
    let members_g = members.clone();
    let wg = w.clone();
    let dim = members[0].dim();
    Ok(ScalarField::with_grad(
        dim,
        move |x: &DVector<f64>| {
            members
                .iter()
                .zip(w.iter())
                .map(|(f, &wj)| wj * f.value(x))
                .sum()
        },
        move |x: &DVector<f64>| {
            let mut g = DVector::zeros(x.len());
            for (f, &wj) in members_g.iter().zip(wg.iter()) {
                g += f.gradient(x) * wj;
            }
            g
        },
    ))
}

/// All expansion coefficients `0..=2k` of `tr(M_eps^k)` at the point `x`.
pub fn magri_coefficients(
    a: &DeformationSequence,
    b: &DeformationSequence,
    k: usize,
    x: &DVector<f64>,
) -> Result<Vec<f64>> {
    check_pencil(a, b)?;
    let n = a.n_size();
    let deg = 2 * k;
    let nodes: Vec<f64> = (-(k as i64)..=k as i64).map(|j| j as f64).collect();
    let values = DVector::from_iterator(
        deg + 1,
        nodes.iter().map(|&eps| {
            let (eta, delta, tail) = blended_weights(a, b, eps);
            quadratic_kernel_field(n, k, eta, delta, tail)
                .map(|f| f.value(x))
                .expect("validated sizes")
        }),
    );
    let v = DMatrix::from_fn(deg + 1, deg + 1, |r, c| nodes[r].powi(c as i32));
    let coeffs = v.try_inverse().expect("distinct integer nodes") * values;
    Ok(coeffs.iter().copied().collect())
}

/// Checks that `a` is the all-ones sequence and `b` differs from it only in
/// entry 1, returning that entry.
pub(crate) fn one_parameter_pencil(
    a: &DeformationSequence,
    b: &DeformationSequence,
) -> Result<f64> {
    if a.n_size() != b.n_size() {
        return Err(Error::ShapeMismatch(
            "pencil members must have equal size".into(),
        ));
    }
    let ones_ok = a.entries().iter().all(|&v| v == 1.0);
    let b_ok = b
        .entries()
        .iter()
        .enumerate()
        .all(|(i, &v)| i == 1 || v == 1.0);
    if !ones_ok || !b_ok {
        return Err(Error::InvalidSequence(
            "closed coefficient rows require the all-ones sequence paired with \
             a sequence differing only in entry 1"
                .into(),
        ));
    }
    Ok(b.entries()[1])
}

/// Closed form of the expansion coefficients for the one-parameter pencil
/// (all-ones paired with a sequence differing only in entry 1), as exact
/// combinations of the block integrals. Available for `k = 1, 2`.
pub fn hkn_closed_field(n: usize, k: usize, nth: usize, b: f64) -> Result<ScalarField> {
    let weights: Vec<(usize, f64)> = match (k, nth) {
        (1, 0) => vec![(1, 1.0), (2, -2.0)],
        (1, 1) => vec![(1, 1.0 + b), (2, -4.0)],
        (1, 2) => vec![(1, b), (2, -2.0)],
        (2, 0) => vec![(3, 1.0), (4, 1.0), (5, 1.0)],
        (2, 1) => vec![(3, 2.0 * (1.0 + b)), (4, 4.0), (5, 3.0 + b)],
        (2, 2) => vec![
            (3, 1.0 + 4.0 * b + b * b),
            (4, 6.0),
            (5, 3.0 * (1.0 + b)),
        ],
        (2, 3) => vec![(3, 2.0 * b * (1.0 + b)), (4, 4.0), (5, 1.0 + 3.0 * b)],
        (2, 4) => vec![(3, b * b), (4, 1.0), (5, b)],
        _ => {
            return Err(Error::IndexOutOfRange(format!(
                "closed coefficient rows cover k in {{1,2}} with nth <= 2k, got k={k}, nth={nth}"
            )))
        }
    };
    let mut total = super::poly::Poly::zero(crate::poisson::Chart::Upper { n }.dim());
    for (which, c) in weights {
        total = total.add(&block_integral_poly(n, which)?.scale(c));
    }
    Ok(total.into_field())
}

/// Largest absolute bracket value over the sample points: zero (to
/// tolerance) when `f` and `g` are in involution.
pub fn involution_residual(
    kind: &crate::poisson::BracketKind,
    f: &ScalarField,
    g: &ScalarField,
    points: &[DVector<f64>],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in points {
        worst = worst.max(crate::poisson::bracket(kind, f, g, x)?.abs());
    }
    Ok(worst)
}
