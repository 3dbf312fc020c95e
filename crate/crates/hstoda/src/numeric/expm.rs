//! Matrix exponential by scaling and squaring with a truncated Taylor series.
//!
//! The argument is scaled so its 1-norm falls below 1/32; the series is then
//! summed far past machine precision and the result squared back up. For the
//! group elements used in this library (norms of order one) the relative
//! accuracy is well below 1e-12.

use nalgebra::DMatrix;

/// Matrix 1-norm (maximum absolute column sum).
fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// exp(x) for a square matrix.
pub fn matrix_exp(x: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(x.nrows(), x.ncols(), "matrix_exp needs a square matrix");
    let n = x.nrows();
    let norm = one_norm(x);
    // Scale down to ‖x/2^s‖ ≤ 1/32, then square s times.
    let s = if norm > 1.0 / 32.0 {
        (norm * 32.0).log2().ceil() as u32
    } else {
        0
    };
    let xs = x / 2f64.powi(s as i32);

    // Taylor series: 22 terms give a truncation error below 1e-30 at this norm.
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=22 {
        term = (&term * &xs) / k as f64;
        result += &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(matrix_exp(&z), DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn exp_x_times_exp_minus_x_is_identity() {
        let x = DMatrix::from_row_slice(
            3,
            3,
            &[0.3, -0.7, 0.2, 0.5, 0.1, -0.4, -0.2, 0.6, 0.05],
        );
        let prod = matrix_exp(&x) * matrix_exp(&(-&x));
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(
            (&prod - &id).norm() < 1e-12,
            "inverse defect {}",
            (&prod - &id).norm()
        );
    }

    #[test]
    fn nilpotent_strictly_upper_series_terminates() {
        // For N=3 strictly upper x, exp(x) = I + x + x²/2 exactly.
        let x = DMatrix::from_row_slice(3, 3, &[0.0, 0.8, -0.3, 0.0, 0.0, 0.55, 0.0, 0.0, 0.0]);
        let want = DMatrix::<f64>::identity(3, 3) + &x + (&x * &x) * 0.5;
        let got = matrix_exp(&x);
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn diagonal_case_matches_scalar_exponentials() {
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -2.0, 0.5]));
        let got = matrix_exp(&x);
        for (i, v) in [1.0f64, -2.0, 0.5].iter().enumerate() {
            assert!((got[(i, i)] - v.exp()).abs() < 1e-12 * v.exp().abs());
        }
    }

    #[test]
    fn rotation_generator_produces_rotation_matrix() {
        let theta = 1.234;
        let x = DMatrix::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0]);
        let got = matrix_exp(&x);
        let want =
            DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        assert!((got - want).norm() < 1e-13);
    }
}
