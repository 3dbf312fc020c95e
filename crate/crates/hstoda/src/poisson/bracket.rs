use nalgebra::DVector;

use super::chart::{idx_kdiag, Chart};
use super::field::ScalarField;
use super::pencil::{pencil_classify, PencilVerdict};
use crate::error::{Error, Result};
use crate::op::{
    diagonal_part, project_minus0, project_plus_alpha, strictly_lower, strictly_upper,
    AlphaCoefficients, DeformationSequence, DiagonalVector, Mat,
};

/// A Poisson structure together with the chart it acts on.
///
/// All structures here are linear (Lie-Poisson): the bracket of two
/// coordinates is a linear combination of coordinates.
#[derive(Debug)]
pub enum BracketKind {
    /// Full-matrix Lie-Poisson bracket `{f, g} = tr(rho [Df, Dg])` with
    /// `Df = (grad f)^T`.
    Canonical { n: usize },
    /// Deformed bracket on strictly upper points:
    /// `{f, g} = tr(rho [Xf, Xg])` with `Xf = (grad f)^T - alpha(grad f)`.
    PlusAlpha { alpha: AlphaCoefficients },
    /// Bracket on lower-plus-diagonal points, independent of the deformation:
    /// `{f, g} = tr((rho_low + rho_diag)[Xf, Xg])` with
    /// `Xf = grad_diag f + (grad_low f)^T`.
    Minus0 { n: usize },
    /// Weighted bracket on strictly upper points:
    /// `{f, g} = tr(rho (Wf eta Wg - Wg eta Wf))` with `Wf = (grad f)^T - grad f`
    /// and `eta` a diagonal weight.
    Eta { eta: DiagonalVector },
    /// Bracket on the first `k` subdiagonals of a banded operator.
    KDiagonal { n: usize, k: usize },
    /// Linear combination `w_alpha {.,.}_alpha + w_beta {.,.}_beta` of two
    /// compatible deformed brackets.
    Pencil {
        alpha: AlphaCoefficients,
        beta: AlphaCoefficients,
        w_alpha: f64,
        w_beta: f64,
    },
}

impl BracketKind {
    /// The chart whose packed coordinates this bracket acts on.
    pub fn chart(&self) -> Chart {
        match self {
            BracketKind::Canonical { n } => Chart::Full { n: *n },
            BracketKind::PlusAlpha { alpha } => Chart::Upper { n: alpha.n_size() },
            BracketKind::Minus0 { n } => Chart::LowerDiag { n: *n },
            BracketKind::Eta { eta } => Chart::Upper { n: eta.len() },
            BracketKind::KDiagonal { n, k } => Chart::KDiagonal { n: *n, k: *k },
            BracketKind::Pencil { alpha, .. } => Chart::Upper { n: alpha.n_size() },
        }
    }

    /// Builds the one-parameter combination `{.,.}_alpha + eps {.,.}_beta`,
    /// validating that the two sequences form a compatible pair.
    pub fn pencil(
        a: &DeformationSequence,
        b: &DeformationSequence,
        eps: f64,
    ) -> Result<Self> {
        Self::pencil_weighted(a, b, 1.0, eps)
    }

    /// Builds the convex combination `p {.,.}_alpha + (1 - p) {.,.}_beta`.
    pub fn pencil_convex(
        a: &DeformationSequence,
        b: &DeformationSequence,
        p: f64,
    ) -> Result<Self> {
        Self::pencil_weighted(a, b, p, 1.0 - p)
    }

    fn pencil_weighted(
        a: &DeformationSequence,
        b: &DeformationSequence,
        w_alpha: f64,
        w_beta: f64,
    ) -> Result<Self> {
        match pencil_classify(a, b)? {
            PencilVerdict::Pass { .. } => Ok(BracketKind::Pencil {
                alpha: crate::op::build_alpha(a),
                beta: crate::op::build_alpha(b),
                w_alpha,
                w_beta,
            }),
            PencilVerdict::Fail { witness: (i, j) } => Err(Error::InvalidPencil { i, j }),
        }
    }
}

fn check_point(kind: &BracketKind, x: &DVector<f64>) -> Result<Chart> {
    let chart = kind.chart();
    if x.len() != chart.dim() {
        return Err(Error::ShapeMismatch(format!(
            "point has {} coordinates, chart {:?} needs {}",
            x.len(),
            chart,
            chart.dim()
        )));
    }
    Ok(chart)
}

fn check_fields(chart: &Chart, fields: &[&ScalarField]) -> Result<()> {
    for f in fields {
        if f.dim() != chart.dim() {
            return Err(Error::ShapeMismatch(format!(
                "field expects {} coordinates, chart {:?} has {}",
                f.dim(),
                chart,
                chart.dim()
            )));
        }
    }
    Ok(())
}

/// `Xf = (grad f)^T - alpha(grad f)` for a strictly upper gradient matrix.
pub(crate) fn deformed_direction(alpha: &AlphaCoefficients, grad_upper: &Mat) -> Mat {
    grad_upper.transpose() - alpha.apply_upper(grad_upper)
}

/// Evaluates `{f, g}` at the packed point `x`.
pub fn bracket(kind: &BracketKind, f: &ScalarField, g: &ScalarField, x: &DVector<f64>) -> Result<f64> {
    let chart = check_point(kind, x)?;
    check_fields(&chart, &[f, g])?;
    let gf = f.gradient(x);
    let gg = g.gradient(x);
    bracket_from_gradients(kind, &chart, &gf, &gg, x)
}

pub(crate) fn bracket_from_gradients(
    kind: &BracketKind,
    chart: &Chart,
    gf: &DVector<f64>,
    gg: &DVector<f64>,
    x: &DVector<f64>,
) -> Result<f64> {
    match kind {
        BracketKind::Canonical { .. } => {
            let rho = chart.unpack(x)?;
            let df = chart.unpack(gf)?.transpose();
            let dg = chart.unpack(gg)?.transpose();
            Ok((&rho * (&df * &dg - &dg * &df)).trace())
        }
        BracketKind::PlusAlpha { alpha } => {
            let rho = chart.unpack(x)?;
            let xf = deformed_direction(alpha, &chart.unpack(gf)?);
            let xg = deformed_direction(alpha, &chart.unpack(gg)?);
            Ok((&rho * (&xf * &xg - &xg * &xf)).trace())
        }
        BracketKind::Minus0 { .. } => {
            let low = chart.unpack(x)?;
            let xf = minus0_direction(&chart.unpack(gf)?);
            let xg = minus0_direction(&chart.unpack(gg)?);
            Ok((&low * (&xf * &xg - &xg * &xf)).trace())
        }
        BracketKind::Eta { eta } => {
            let rho = chart.unpack(x)?;
            let gf_m = chart.unpack(gf)?;
            let gg_m = chart.unpack(gg)?;
            let wf = gf_m.transpose() - &gf_m;
            let wg = gg_m.transpose() - &gg_m;
            Ok((&rho * crate::op::eta_bracket(&wf, &wg, eta)).trace())
        }
        BracketKind::KDiagonal { n, k } => Ok(kdiag_bracket(*n, *k, gf, gg, x)),
        BracketKind::Pencil {
            alpha,
            beta,
            w_alpha,
            w_beta,
        } => {
            let rho = chart.unpack(x)?;
            let gf_m = chart.unpack(gf)?;
            let gg_m = chart.unpack(gg)?;
            let mut total = 0.0;
            for (w, ab) in [(*w_alpha, alpha), (*w_beta, beta)] {
                if w != 0.0 {
                    let xf = deformed_direction(ab, &gf_m);
                    let xg = deformed_direction(ab, &gg_m);
                    total += w * (&rho * (&xf * &xg - &xg * &xf)).trace();
                }
            }
            Ok(total)
        }
    }
}

/// `Xf = grad_diag f + (grad_low f)^T` for a lower-plus-diagonal gradient.
pub(crate) fn minus0_direction(grad: &Mat) -> Mat {
    diagonal_part(grad) + strictly_lower(grad).transpose()
}

fn kdiag_bracket(n: usize, k: usize, gf: &DVector<f64>, gg: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let coord = |v: &DVector<f64>, l: usize, m: usize| -> f64 {
        if m + l < n {
            v[idx_kdiag(n, l, m)]
        } else {
            0.0
        }
    };
    let mut total = 0.0;
    for l in 0..k {
        for i in 0..=l {
            for m in 0..(n - l) {
                let rho_l = coord(x, l, m);
                if rho_l == 0.0 {
                    continue;
                }
                total += rho_l
                    * (coord(gf, i, m) * coord(gg, l - i, m + i)
                        - coord(gg, i, m) * coord(gf, l - i, m + i));
            }
        }
    }
    total
}

/// The Hamiltonian vector field of `h` at `x`, packed in the bracket's chart:
/// component `u` equals `{x_u, h}(x)`.
pub fn ham_vector_field(kind: &BracketKind, h: &ScalarField, x: &DVector<f64>) -> Result<DVector<f64>> {
    let chart = check_point(kind, x)?;
    check_fields(&chart, &[h])?;
    let gh = h.gradient(x);
    ham_field_from_gradient(kind, &chart, &gh, x)
}

fn ham_field_from_gradient(
    kind: &BracketKind,
    chart: &Chart,
    gh: &DVector<f64>,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    match kind {
        BracketKind::Canonical { .. } => {
            let rho = chart.unpack(x)?;
            let dh = chart.unpack(gh)?.transpose();
            chart.pack(&(&dh * &rho - &rho * &dh))
        }
        BracketKind::PlusAlpha { alpha } => {
            let rho = chart.unpack(x)?;
            let xh = deformed_direction(alpha, &chart.unpack(gh)?);
            let c = &xh * &rho - &rho * &xh;
            chart.pack(&project_plus_alpha(alpha, &c)?)
        }
        BracketKind::Minus0 { .. } => {
            let low = chart.unpack(x)?;
            let xh = minus0_direction(&chart.unpack(gh)?);
            let c = &xh * &low - &low * &xh;
            chart.pack(&project_minus0(&c))
        }
        BracketKind::Eta { eta } => {
            let rho = chart.unpack(x)?;
            let gh_m = chart.unpack(gh)?;
            let wh = gh_m.transpose() - &gh_m;
            let e = Mat::from_diagonal(&DVector::from_column_slice(eta.entries()));
            let c = &e * &wh * &rho - &rho * &wh * &e;
            chart.pack(&(strictly_upper(&c) - strictly_lower(&c).transpose()))
        }
        BracketKind::KDiagonal { n, k } => {
            let (n, k) = (*n, *k);
            let coord = |v: &DVector<f64>, l: usize, m: i64| -> f64 {
                if m >= 0 && (m as usize) + l < n {
                    v[idx_kdiag(n, l, m as usize)]
                } else {
                    0.0
                }
            };
            let mut out = DVector::zeros(chart.dim());
            for j in 0..k {
                for m in 0..(n - j) {
                    let mut dot = 0.0;
                    for l in j..k {
                        let s = (l - j) as i64;
                        dot += coord(x, l, m as i64) * coord(gh, l - j, (m + j) as i64)
                            - coord(x, l, m as i64 - s) * coord(gh, l - j, m as i64 - s);
                    }
                    out[idx_kdiag(n, j, m)] = dot;
                }
            }
            Ok(out)
        }
        BracketKind::Pencil {
            alpha,
            beta,
            w_alpha,
            w_beta,
        } => {
            let rho = chart.unpack(x)?;
            let gh_m = chart.unpack(gh)?;
            let mut out = DVector::zeros(chart.dim());
            for (w, ab) in [(*w_alpha, alpha), (*w_beta, beta)] {
                if w != 0.0 {
                    let xh = deformed_direction(ab, &gh_m);
                    let c = &xh * &rho - &rho * &xh;
                    out += chart.pack(&project_plus_alpha(ab, &c)?)? * w;
                }
            }
            Ok(out)
        }
    }
}

/// Expands `{rho_{ij}, rho_{nm}}` for the deformed bracket on strictly upper
/// points as a sparse combination of coordinates: the returned pairs
/// `(coeff, (u, v))` mean `sum coeff * rho_{uv}`.
pub fn structure_bracket(
    alpha: &AlphaCoefficients,
    ij: (usize, usize),
    nm: (usize, usize),
) -> Result<Vec<(f64, (usize, usize))>> {
    let nsize = alpha.n_size();
    let (i, j) = ij;
    let (n, m) = nm;
    if i >= j || j >= nsize || n >= m || m >= nsize {
        return Err(Error::IndexOutOfRange(format!(
            "structure bracket needs strictly upper index pairs below {nsize}, got ({i},{j}) and ({n},{m})"
        )));
    }
    let mut terms: Vec<(f64, (usize, usize))> = Vec::new();
    let mut push = |c: f64, uv: (usize, usize)| {
        if c != 0.0 {
            if let Some(t) = terms.iter_mut().find(|t| t.1 == uv) {
                t.0 += c;
            } else {
                terms.push((c, uv));
            }
        }
    };
    if m == i {
        push(1.0, (n, j));
    }
    if j == n {
        push(-1.0, (i, m));
    }
    if j == m && n != i {
        if n < i {
            push(-alpha.get(i, j), (n, i));
        } else {
            push(alpha.get(n, j), (i, n));
        }
    }
    if i == n && j != m {
        if m < j {
            push(-alpha.get(i, m), (m, j));
        } else {
            push(alpha.get(i, j), (j, m));
        }
    }
    terms.retain(|t| t.0 != 0.0);
    terms.sort_by_key(|t| t.1);
    Ok(terms)
}
