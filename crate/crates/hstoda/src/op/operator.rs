use nalgebra::DMatrix;

use super::alpha::AlphaCoefficients;
use super::diagonal::DiagonalVector;
use crate::error::{Error, Result};

/// Dense real matrix used throughout the crate.
pub type Mat = DMatrix<f64>;

/// Splits `x` into (strictly lower, diagonal, strictly upper) parts whose sum
/// is `x`.
pub fn split(x: &Mat) -> (Mat, Mat, Mat) {
    (strictly_lower(x), diagonal_part(x), strictly_upper(x))
}

/// The strictly lower triangular part of `x`.
pub fn strictly_lower(x: &Mat) -> Mat {
    let (r, c) = x.shape();
    Mat::from_fn(r, c, |i, j| if i > j { x[(i, j)] } else { 0.0 })
}

/// The diagonal part of `x` as a full matrix.
pub fn diagonal_part(x: &Mat) -> Mat {
    let (r, c) = x.shape();
    Mat::from_fn(r, c, |i, j| if i == j { x[(i, j)] } else { 0.0 })
}

/// The strictly upper triangular part of `x`.
pub fn strictly_upper(x: &Mat) -> Mat {
    let (r, c) = x.shape();
    Mat::from_fn(r, c, |i, j| if i < j { x[(i, j)] } else { 0.0 })
}

/// True when every entry of `x` on or below the diagonal has magnitude at
/// most `tol`.
pub fn is_strictly_upper(x: &Mat, tol: f64) -> bool {
    let (r, c) = x.shape();
    for i in 0..r {
        for j in 0..c.min(i + 1) {
            if x[(i, j)].abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Deformed projector onto the lower-plus-diagonal model subalgebra:
/// `x -> x_lower + x_diag + alpha(x_lower^T)`.
///
/// The image consists of matrices whose strictly upper part is the
/// table-weighted transpose of their strictly lower part; the projector is
/// idempotent and complementary to [`project_plus_alpha`].
pub fn project_alpha(alpha: &AlphaCoefficients, x: &Mat) -> Result<Mat> {
    check_shape(alpha, x)?;
    let lower = strictly_lower(x);
    Ok(&lower + diagonal_part(x) + alpha.apply_upper(&lower.transpose()))
}

/// Deformed projector onto the strictly upper model subalgebra:
/// `x -> x_upper - alpha(x_lower^T)`.
pub fn project_plus_alpha(alpha: &AlphaCoefficients, x: &Mat) -> Result<Mat> {
    check_shape(alpha, x)?;
    Ok(strictly_upper(x) - alpha.apply_upper(&strictly_lower(x).transpose()))
}

/// Undeformed projector onto the lower-plus-diagonal part: `x -> x_lower + x_diag`.
pub fn project_minus0(x: &Mat) -> Mat {
    strictly_lower(x) + diagonal_part(x)
}

/// Skew-type basis element `e_{ij}` (for `i < j`): the matrix with `+1` at
/// row `j`, column `i` and `-alpha_{ij}` at row `i`, column `j`.
///
/// These span the deformed subalgebra on which [`project_plus_alpha`] acts as
/// minus twice the table weight: `project_plus_alpha(e_{ij})` has the single
/// entry `-2 alpha_{ij}` at `(i, j)`... see the unit tests for the exact
/// statement.
pub fn basis_e(alpha: &AlphaCoefficients, i: usize, j: usize) -> Result<Mat> {
    let n = alpha.n_size();
    if i >= j || j >= n {
        return Err(Error::IndexOutOfRange(format!(
            "basis element requires 0 <= i < j < {n}, got ({i}, {j})"
        )));
    }
    let mut m = Mat::zeros(n, n);
    m[(j, i)] = 1.0;
    m[(i, j)] = -alpha.get(i, j);
    Ok(m)
}

/// Weighted commutator `[x, y]_eta = x eta y - y eta x` with `eta` a diagonal
/// weight.
pub fn eta_bracket(x: &Mat, y: &Mat, eta: &DiagonalVector) -> Mat {
    let e = Mat::from_diagonal(&nalgebra::DVector::from_column_slice(eta.entries()));
    x * &e * y - y * &e * x
}

/// True when `x eta + eta x^T` vanishes to within `tol`, i.e. `x` lies in the
/// eta-weighted orthogonal algebra.
pub fn in_o_eta(x: &Mat, eta: &DiagonalVector, tol: f64) -> bool {
    let e = Mat::from_diagonal(&nalgebra::DVector::from_column_slice(eta.entries()));
    let res = x * &e + &e * x.transpose();
    res.amax() <= tol
}

fn check_shape(alpha: &AlphaCoefficients, x: &Mat) -> Result<()> {
    let n = alpha.n_size();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "expected {n}x{n} matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}
