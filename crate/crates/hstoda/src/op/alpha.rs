use nalgebra::DMatrix;

use super::operator::{is_strictly_upper, Mat};
use super::sequence::DeformationSequence;
use crate::error::{Error, Result};

/// Multiplicative coefficient table generated by a [`DeformationSequence`].
///
/// For a sequence `a_0..a_{N-1}` the table holds
/// `alpha_{ij} = a_i * a_{i+1} * ... * a_{j-1}` for `i <= j` (so
/// `alpha_{ii} = 1`), together with the derived diagonal weights
///
/// * `eta_i = a_i * ... * a_{N-1}` (suffix products, including the final
///   entry `a_{N-1}`),
/// * `delta_i = alpha_{0i} = a_0 * ... * a_{i-1}` (prefix products),
/// * `tail = a_0 * ... * a_{N-1}`, the product of the whole sequence.
///
/// As real numbers these satisfy the cocycle relation
/// `alpha_{ij} * alpha_{jk} = alpha_{ik}` and the factorisation
/// `eta_i * delta_i = tail` for every index; in floating point the relations
/// hold to a few units in the last place (and exactly whenever the entries
/// are dyadic rationals, zeros or ones).
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCoefficients {
    n: usize,
    table: DMatrix<f64>,
    eta: Vec<f64>,
    delta: Vec<f64>,
    tail: f64,
    sequence: Vec<f64>,
}

/// Builds the coefficient table of a validated sequence.
pub fn build_alpha(seq: &DeformationSequence) -> AlphaCoefficients {
    let n = seq.n_size();
    let a = seq.entries();
    let mut table = DMatrix::zeros(n, n);
    for i in 0..n {
        table[(i, i)] = 1.0;
        for j in (i + 1)..n {
            table[(i, j)] = table[(i, j - 1)] * a[j - 1];
        }
    }
    let mut eta = vec![0.0; n];
    eta[n - 1] = a[n - 1];
    for i in (0..n - 1).rev() {
        eta[i] = a[i] * eta[i + 1];
    }
    let delta: Vec<f64> = (0..n).map(|i| table[(0, i)]).collect();
    let tail = eta[0];
    AlphaCoefficients {
        n,
        table,
        eta,
        delta,
        tail,
        sequence: a.to_vec(),
    }
}

impl AlphaCoefficients {
    /// Truncation size `N`.
    pub fn n_size(&self) -> usize {
        self.n
    }

    /// Table entry `alpha_{ij}` for `i <= j`.
    ///
    /// # Panics
    /// Panics when `i > j` or when an index is out of range: entries below
    /// the diagonal are not part of the table.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(
            i <= j && j < self.n,
            "alpha table is defined for 0 <= i <= j < {}, got ({i}, {j})",
            self.n
        );
        self.table[(i, j)]
    }

    /// Suffix products `eta_i = a_i ... a_{N-1}`.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Prefix products `delta_i = a_0 ... a_{i-1}`.
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Product of the full sequence.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// The generating sequence entries.
    pub fn sequence(&self) -> &[f64] {
        &self.sequence
    }

    /// Diagonal matrix `diag(eta_0, ..., eta_{N-1})`.
    pub fn eta_matrix(&self) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eta))
    }

    /// Diagonal matrix `diag(delta_0, ..., delta_{N-1})`.
    pub fn delta_matrix(&self) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_column_slice(&self.delta))
    }

    /// True when every sequence entry is nonzero, i.e. the entrywise map
    /// [`alpha_apply`] is invertible on strictly upper matrices.
    pub fn is_nonsingular(&self) -> bool {
        self.sequence.iter().all(|&a| a != 0.0)
    }

    /// Entrywise multiplication of the strictly upper part by the table,
    /// without validating the input shape. The strictly lower part and the
    /// diagonal of the result are zero.
    pub(crate) fn apply_upper(&self, x: &Mat) -> Mat {
        let mut out = Mat::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                out[(i, j)] = self.table[(i, j)] * x[(i, j)];
            }
        }
        out
    }
}

/// Applies the coefficient table entrywise to a strictly upper triangular
/// matrix: `(alpha . x)_{ij} = alpha_{ij} x_{ij}` for `i < j`.
///
/// Returns an error if `x` is not square of the table's size or has a
/// nonzero entry on or below the diagonal.
pub fn alpha_apply(alpha: &AlphaCoefficients, x: &Mat) -> Result<Mat> {
    let n = alpha.n_size();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "expected {n}x{n} matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    if !is_strictly_upper(x, 0.0) {
        return Err(Error::ShapeMismatch(
            "alpha_apply expects a strictly upper triangular matrix".into(),
        ));
    }
    Ok(alpha.apply_upper(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize, i: usize, j: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        m[(i, j)] = 1.0;
        m
    }

    #[test]
    fn all_ones_sequence_gives_all_ones_table() {
        let alpha = build_alpha(&DeformationSequence::ones(4));
        for i in 0..4 {
            for j in i..4 {
                assert_eq!(alpha.get(i, j), 1.0);
            }
        }
        assert_eq!(alpha.tail(), 1.0);
        assert_eq!(alpha.eta(), &[1.0; 4]);
        assert_eq!(alpha.delta(), &[1.0; 4]);
    }

    #[test]
    fn all_zeros_sequence_kills_off_diagonal_entries() {
        let alpha = build_alpha(&DeformationSequence::zeros(3));
        for i in 0..3 {
            for j in i..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(alpha.get(i, j), expected);
            }
        }
        assert_eq!(alpha.tail(), 0.0);
        assert!(!alpha.is_nonsingular());
    }

    #[test]
    fn three_entry_example_products() {
        let seq = DeformationSequence::new(vec![0.5, 1.0 / 3.0, 1.0]).unwrap();
        let alpha = build_alpha(&seq);
        assert!(alpha.get(0, 2) == 1.0 / 6.0);
        assert!(alpha.eta()[0] == 1.0 / 6.0);
        assert!(alpha.delta()[2] == 1.0 / 6.0);
        assert!(alpha.tail() == 1.0 / 6.0);
        assert_eq!(alpha.get(1, 1), 1.0);
        assert!(alpha.is_nonsingular());
    }

    #[test]
    fn cocycle_exact_for_dyadic_entries() {
        let seq = DeformationSequence::new(vec![0.5, -0.25, 1.0, -0.5, 0.125]).unwrap();
        let alpha = build_alpha(&seq);
        for i in 0..5 {
            for j in i..5 {
                for k in j..5 {
                    assert!(alpha.get(i, j) * alpha.get(j, k) == alpha.get(i, k));
                }
            }
        }
        for i in 0..5 {
            assert!(alpha.eta()[i] * alpha.delta()[i] == alpha.tail());
        }
    }

    #[test]
    fn cocycle_tight_for_generic_entries() {
        let seq =
            DeformationSequence::new(vec![0.731, -0.294, 0.958, 0.112, -0.645, 0.377]).unwrap();
        let alpha = build_alpha(&seq);
        let n = alpha.n_size();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let lhs = alpha.get(i, j) * alpha.get(j, k);
                    let rhs = alpha.get(i, k);
                    assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs().max(1.0));
                }
            }
        }
        for i in 0..n {
            let res = alpha.eta()[i] * alpha.delta()[i] - alpha.tail();
            assert!(res.abs() <= 1e-14 * alpha.tail().abs().max(1.0));
        }
    }

    #[test]
    fn apply_scales_upper_entries() {
        let seq = DeformationSequence::new(vec![0.5, 1.0 / 3.0, 1.0]).unwrap();
        let alpha = build_alpha(&seq);
        let out = alpha_apply(&alpha, &unit(3, 0, 2)).unwrap();
        assert!(out[(0, 2)] == 1.0 / 6.0);
        assert_eq!(out[(1, 2)], 0.0);

        let ones = build_alpha(&DeformationSequence::ones(3));
        let x = unit(3, 0, 1) + unit(3, 1, 2) * 2.0;
        assert_eq!(alpha_apply(&ones, &x).unwrap(), x);
    }

    #[test]
    fn apply_rejects_non_upper_input() {
        let alpha = build_alpha(&DeformationSequence::ones(3));
        assert!(alpha_apply(&alpha, &unit(3, 1, 1)).is_err());
        assert!(alpha_apply(&alpha, &unit(3, 2, 0)).is_err());
        assert!(alpha_apply(&alpha, &Mat::zeros(2, 2)).is_err());
    }
}
