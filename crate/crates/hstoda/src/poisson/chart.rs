use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::op::Mat;

/// Coordinate chart on a space of truncated operators.
///
/// A chart fixes which matrix entries are coordinates and how they are packed
/// into a flat vector. All Poisson structures in this crate are expressed in
/// one of these charts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chart {
    /// Strictly upper triangular entries `rho_{ij}`, `i < j`, packed row by
    /// row: `(0,1), (0,2), ..., (1,2), ...`.
    Upper { n: usize },
    /// Strictly lower entries packed row by row (`(1,0), (2,0), (2,1), ...`)
    /// followed by the diagonal entries `(0,0), ..., (n-1,n-1)`.
    LowerDiag { n: usize },
    /// All `n^2` entries, row-major.
    Full { n: usize },
    /// The first `k` subdiagonals of a lower banded operator, packed band by
    /// band: band `l` holds the entries at `(m + l, m)` for
    /// `m = 0..n-1-l`.
    KDiagonal { n: usize, k: usize },
}

/// Packed position of the strictly upper entry `(i, j)`, `i < j`.
pub fn idx_upper(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Packed position of a lower-diagonal chart entry: strictly lower `(i, j)`
/// with `i > j`, or diagonal `(i, i)`.
pub fn idx_lower_diag(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j && i < n);
    if i == j {
        n * (n - 1) / 2 + i
    } else {
        i * (i - 1) / 2 + j
    }
}

/// Packed position of the full-chart entry `(i, j)` (row-major).
pub fn idx_full(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < n && j < n);
    i * n + j
}

/// Packed position of band `l`, offset `m` in the k-diagonal chart.
pub fn idx_kdiag(n: usize, l: usize, m: usize) -> usize {
    debug_assert!(m + l < n);
    (0..l).map(|r| n - r).sum::<usize>() + m
}

impl Chart {
    /// Number of packed coordinates.
    pub fn dim(&self) -> usize {
        match *self {
            Chart::Upper { n } => n * (n - 1) / 2,
            Chart::LowerDiag { n } => n * (n - 1) / 2 + n,
            Chart::Full { n } => n * n,
            Chart::KDiagonal { n, k } => (0..k).map(|l| n - l).sum(),
        }
    }

    /// Ambient truncation size.
    pub fn n_size(&self) -> usize {
        match *self {
            Chart::Upper { n }
            | Chart::LowerDiag { n }
            | Chart::Full { n }
            | Chart::KDiagonal { n, .. } => n,
        }
    }

    /// Human-readable names of the packed coordinates, in packing order.
    pub fn coord_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        match *self {
            Chart::Upper { n } => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        names.push(format!("rho_{i}_{j}"));
                    }
                }
            }
            Chart::LowerDiag { n } => {
                for i in 1..n {
                    for j in 0..i {
                        names.push(format!("rho_{i}_{j}"));
                    }
                }
                for i in 0..n {
                    names.push(format!("rho_{i}_{i}"));
                }
            }
            Chart::Full { n } => {
                for i in 0..n {
                    for j in 0..n {
                        names.push(format!("rho_{i}_{j}"));
                    }
                }
            }
            Chart::KDiagonal { n, k } => {
                for l in 0..k {
                    for m in 0..(n - l) {
                        names.push(format!("d{l}_{m}"));
                    }
                }
            }
        }
        names
    }

    /// Packs the chart's coordinates out of a dense matrix.
    pub fn pack(&self, m: &Mat) -> Result<DVector<f64>> {
        let n = self.n_size();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "expected {n}x{n} matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut v = DVector::zeros(self.dim());
        match *self {
            Chart::Upper { n } => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        v[idx_upper(n, i, j)] = m[(i, j)];
                    }
                }
            }
            Chart::LowerDiag { n } => {
                for i in 0..n {
                    for j in 0..=i {
                        v[idx_lower_diag(n, i, j)] = m[(i, j)];
                    }
                }
            }
            Chart::Full { n } => {
                for i in 0..n {
                    for j in 0..n {
                        v[idx_full(n, i, j)] = m[(i, j)];
                    }
                }
            }
            Chart::KDiagonal { n, k } => {
                for l in 0..k {
                    for off in 0..(n - l) {
                        v[idx_kdiag(n, l, off)] = m[(off + l, off)];
                    }
                }
            }
        }
        Ok(v)
    }

    /// Rebuilds the dense matrix carrying the packed coordinates; entries
    /// outside the chart are zero.
    pub fn unpack(&self, v: &DVector<f64>) -> Result<Mat> {
        if v.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} packed coordinates, got {}",
                self.dim(),
                v.len()
            )));
        }
        let n = self.n_size();
        let mut m = Mat::zeros(n, n);
        match *self {
            Chart::Upper { n } => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        m[(i, j)] = v[idx_upper(n, i, j)];
                    }
                }
            }
            Chart::LowerDiag { n } => {
                for i in 0..n {
                    for j in 0..=i {
                        m[(i, j)] = v[idx_lower_diag(n, i, j)];
                    }
                }
            }
            Chart::Full { n } => {
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = v[idx_full(n, i, j)];
                    }
                }
            }
            Chart::KDiagonal { n, k } => {
                for l in 0..k {
                    for off in 0..(n - l) {
                        m[(off + l, off)] = v[idx_kdiag(n, l, off)];
                    }
                }
            }
        }
        Ok(m)
    }
}
