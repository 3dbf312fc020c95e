use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::op::{strictly_lower, AlphaCoefficients, Mat};
use crate::poisson::{Chart, ScalarField};

/// Matrix power by repeated multiplication (small exponents only).
fn mat_pow(m: &Mat, p: usize) -> Mat {
    let n = m.nrows();
    let mut out = Mat::identity(n, n);
    for _ in 0..p {
        out = &out * m;
    }
    out
}

/// `tr(rho^l) / l` on the full chart, with gradient `(rho^{l-1})^T`.
pub fn trace_power_field(n: usize, l: usize) -> Result<ScalarField> {
    if l == 0 {
        return Err(Error::IndexOutOfRange("trace power needs l >= 1".into()));
    }
    let chart = Chart::Full { n };
    let chart_g = chart.clone();
    Ok(ScalarField::with_grad(
        chart.dim(),
        move |x: &DVector<f64>| {
            let rho = chart.unpack(x).expect("chart dim checked");
            mat_pow(&rho, l).trace() / l as f64
        },
        move |x: &DVector<f64>| {
            let rho = chart_g.unpack(x).expect("chart dim checked");
            let g = mat_pow(&rho, l - 1).transpose();
            chart_g.pack(&g).expect("same shape")
        },
    ))
}

/// `tr(S^l) / l` on the lower-plus-diagonal chart, where
/// `S = rho_low + rho_diag + alpha(rho_low^T)` is the deformed embedding.
pub fn trace_power_alpha_field(alpha: &AlphaCoefficients, l: usize) -> Result<ScalarField> {
    if l == 0 {
        return Err(Error::IndexOutOfRange("trace power needs l >= 1".into()));
    }
    let n = alpha.n_size();
    let chart = Chart::LowerDiag { n };
    let chart_g = chart.clone();
    let alpha_e = alpha.clone();
    let alpha_g = alpha.clone();
    Ok(ScalarField::with_grad(
        chart.dim(),
        move |x: &DVector<f64>| {
            let low = chart.unpack(x).expect("chart dim checked");
            let s = &low + alpha_e.apply_upper(&strictly_lower(&low).transpose());
            mat_pow(&s, l).trace() / l as f64
        },
        move |x: &DVector<f64>| {
            let low = chart_g.unpack(x).expect("chart dim checked");
            let s = &low + alpha_g.apply_upper(&strictly_lower(&low).transpose());
            let w = mat_pow(&s, l - 1);
            // d tr(S^l)/l = tr(S^{l-1} (dlow + alpha(dlow^T))): the lower
            // entry (i,j) picks up W_{ji} + alpha_{ji} W_{ij}, the diagonal
            // entry (i,i) picks up W_{ii}.
            let mut g = Mat::zeros(n, n);
            for i in 0..n {
                g[(i, i)] = w[(i, i)];
                for j in 0..i {
                    g[(i, j)] = w[(j, i)] + alpha_g.get(j, i) * w[(i, j)];
                }
            }
            chart_g.pack(&g).expect("same shape")
        },
    ))
}

/// `tr(rho_diag^l) / l` on the lower-plus-diagonal chart.
pub fn trace_power_diag_field(n: usize, l: usize) -> Result<ScalarField> {
    if l == 0 {
        return Err(Error::IndexOutOfRange("trace power needs l >= 1".into()));
    }
    let chart = Chart::LowerDiag { n };
    let chart_g = chart.clone();
    Ok(ScalarField::with_grad(
        chart.dim(),
        move |x: &DVector<f64>| {
            let low = chart.unpack(x).expect("chart dim checked");
            (0..n).map(|i| low[(i, i)].powi(l as i32)).sum::<f64>() / l as f64
        },
        move |x: &DVector<f64>| {
            let low = chart_g.unpack(x).expect("chart dim checked");
            let mut g = Mat::zeros(n, n);
            for i in 0..n {
                g[(i, i)] = low[(i, i)].powi(l as i32 - 1);
            }
            chart_g.pack(&g).expect("same shape")
        },
    ))
}

/// The weighted quadratic kernel
/// `M(rho) = tail rho^2 - rho H rho^T D - H rho^T D rho + H (rho^T)^2 D`
/// with `H = diag(eta)`, `D = diag(delta)`, on strictly upper points.
pub(crate) fn quadratic_kernel(rho: &Mat, eta: &[f64], delta: &[f64], tail: f64) -> Mat {
    let h = Mat::from_diagonal(&DVector::from_column_slice(eta));
    let d = Mat::from_diagonal(&DVector::from_column_slice(delta));
    let rt = rho.transpose();
    rho * rho * tail - rho * &h * &rt * &d - &h * &rt * &d * rho + &h * &rt * &rt * &d
}

/// `tr(M(rho)^k)` for the weighted quadratic kernel, with analytic gradient.
///
/// With the weights of a deformation table (`eta`, `delta`, `tail`) this is
/// the spectral invariant family of the deformed bracket; with blended
/// weights it provides the pencil deformations used by the bi-Hamiltonian
/// coefficient extraction.
pub fn quadratic_kernel_field(
    n: usize,
    k: usize,
    eta: Vec<f64>,
    delta: Vec<f64>,
    tail: f64,
) -> Result<ScalarField> {
    if k == 0 {
        return Err(Error::IndexOutOfRange("kernel power needs k >= 1".into()));
    }
    if eta.len() != n || delta.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "weights must have length {n}, got {} and {}",
            eta.len(),
            delta.len()
        )));
    }
    let chart = Chart::Upper { n };
    let chart_g = chart.clone();
    let (eta_e, delta_e) = (eta.clone(), delta.clone());
    Ok(ScalarField::with_grad(
        chart.dim(),
        move |x: &DVector<f64>| {
            let rho = chart.unpack(x).expect("chart dim checked");
            mat_pow(&quadratic_kernel(&rho, &eta_e, &delta_e, tail), k).trace()
        },
        move |x: &DVector<f64>| {
            let rho = chart_g.unpack(x).expect("chart dim checked");
            let m = quadratic_kernel(&rho, &eta, &delta, tail);
            let w = mat_pow(&m, k - 1) * k as f64;
            let h = Mat::from_diagonal(&DVector::from_column_slice(&eta));
            let d = Mat::from_diagonal(&DVector::from_column_slice(&delta));
            let rt = rho.transpose();
            // d tr(M^k) = k tr(M^{k-1} dM); collecting the four kernel terms
            // by transposition against d(rho) gives the full-matrix gradient
            // below, whose strictly upper part is the packed gradient.
            let g_full = (&rho * &w + &w * &rho).transpose() * tail
                - (&h * &rt * &d * &w).transpose()
                - &d * &w * &rho * &h
                - &d * &rho * &w * &h
                - (&w * &h * &rt * &d).transpose()
                + &rt * &d * &w * &h
                + &d * &w * &h * &rt;
            let mut g = Mat::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    g[(i, j)] = g_full[(i, j)];
                }
            }
            chart_g.pack(&g).expect("same shape")
        },
    ))
}

/// Spectral invariant `tr(M_alpha(rho)^k)` of the deformed bracket.
pub fn ik_alpha_field(alpha: &AlphaCoefficients, k: usize) -> Result<ScalarField> {
    quadratic_kernel_field(
        alpha.n_size(),
        k,
        alpha.eta().to_vec(),
        alpha.delta().to_vec(),
        alpha.tail(),
    )
}
