//! Integrals of the cubic block flow, written as exact polynomials on the
//! strictly upper chart of size `n`.
//!
//! The block coordinates inside that chart are: the scalar `a = rho_01`, the
//! vectors `x_j = rho_{0,j+2}` and `y_j = rho_{1,j+2}` of length `m = n - 2`,
//! and the strictly upper trailing block `d_pq = rho_{p+2,q+2}`. `K = d - d^T`
//! is the skew part of the trailing block.

use super::poly::Poly;
use crate::error::{Error, Result};
use crate::poisson::{idx_upper, Chart, ScalarField};

struct BlockIndices {
    n: usize,
    dim: usize,
}

impl BlockIndices {
    fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::ShapeMismatch(format!(
                "block integrals need size >= 3, got {n}"
            )));
        }
        Ok(Self {
            n,
            dim: Chart::Upper { n }.dim(),
        })
    }

    fn m(&self) -> usize {
        self.n - 2
    }

    fn a(&self) -> Poly {
        Poly::coord(self.dim, idx_upper(self.n, 0, 1))
    }

    fn x(&self, j: usize) -> Poly {
        Poly::coord(self.dim, idx_upper(self.n, 0, j + 2))
    }

    fn y(&self, j: usize) -> Poly {
        Poly::coord(self.dim, idx_upper(self.n, 1, j + 2))
    }

    /// `K_pq` as a polynomial: `d_pq` above the diagonal, `-d_qp` below,
    /// zero on the diagonal.
    fn k_entry(&self, p: usize, q: usize) -> Poly {
        use std::cmp::Ordering;
        match p.cmp(&q) {
            Ordering::Less => Poly::coord(self.dim, idx_upper(self.n, p + 2, q + 2)),
            Ordering::Greater => {
                Poly::coord(self.dim, idx_upper(self.n, q + 2, p + 2)).scale(-1.0)
            }
            Ordering::Equal => Poly::zero(self.dim),
        }
    }

    fn k_matrix(&self) -> Vec<Vec<Poly>> {
        (0..self.m())
            .map(|p| (0..self.m()).map(|q| self.k_entry(p, q)).collect())
            .collect()
    }
}

fn poly_mat_mul(a: &[Vec<Poly>], b: &[Vec<Poly>], dim: usize) -> Vec<Vec<Poly>> {
    let m = a.len();
    (0..m)
        .map(|p| {
            (0..m)
                .map(|q| {
                    let mut s = Poly::zero(dim);
                    for r in 0..m {
                        s = s.add(&a[p][r].mul(&b[r][q]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

fn poly_mat_trace(a: &[Vec<Poly>], dim: usize) -> Poly {
    let mut s = Poly::zero(dim);
    for (p, row) in a.iter().enumerate() {
        s = s.add(&row[p]);
    }
    s
}

/// `v^T A w` for polynomial vectors and matrix.
fn quad_form(v: &[Poly], a: &[Vec<Poly>], w: &[Poly], dim: usize) -> Poly {
    let mut s = Poly::zero(dim);
    for (p, vp) in v.iter().enumerate() {
        for (q, wq) in w.iter().enumerate() {
            s = s.add(&vp.mul(&a[p][q]).mul(wq));
        }
    }
    s
}

fn dot(v: &[Poly], w: &[Poly], dim: usize) -> Poly {
    let mut s = Poly::zero(dim);
    for (vp, wp) in v.iter().zip(w) {
        s = s.add(&vp.mul(wp));
    }
    s
}

pub(crate) fn block_integral_poly(n: usize, which: usize) -> Result<Poly> {
    let ix = BlockIndices::new(n)?;
    let dim = ix.dim;
    let a = ix.a();
    let xs: Vec<Poly> = (0..ix.m()).map(|j| ix.x(j)).collect();
    let ys: Vec<Poly> = (0..ix.m()).map(|j| ix.y(j)).collect();
    let poly = match which {
        // h1 = -2 a^2 + tr(K^2)
        1 => {
            let k = ix.k_matrix();
            let k2 = poly_mat_mul(&k, &k, dim);
            a.square().scale(-2.0).add(&poly_mat_trace(&k2, dim))
        }
        // h2 = |x|^2 + |y|^2
        2 => dot(&xs, &xs, dim).add(&dot(&ys, &ys, dim)),
        // h3 = tr(K^4) + 2 a^4
        3 => {
            let k = ix.k_matrix();
            let k2 = poly_mat_mul(&k, &k, dim);
            let k4 = poly_mat_mul(&k2, &k2, dim);
            poly_mat_trace(&k4, dim).add(&a.square().square().scale(2.0))
        }
        // h4 = (|x|^2 - |y|^2)^2 + 4 (x.y)^2 + (|x|^2 + |y|^2)^2
        4 => {
            let na = dot(&xs, &xs, dim);
            let nb = dot(&ys, &ys, dim);
            let p = dot(&xs, &ys, dim);
            na.clone()
                .add(&nb.clone().scale(-1.0))
                .square()
                .add(&p.square().scale(4.0))
                .add(&na.add(&nb).square())
        }
        // h5 = 4 a^2 (|x|^2 + |y|^2) + 8 a x^T K y - 4 (x^T K^2 x + y^T K^2 y)
        5 => {
            let k = ix.k_matrix();
            let k2 = poly_mat_mul(&k, &k, dim);
            let a2 = a.square();
            let part1 = a2.mul(&dot(&xs, &xs, dim).add(&dot(&ys, &ys, dim))).scale(4.0);
            let part2 = a.mul(&quad_form(&xs, &k, &ys, dim)).scale(8.0);
            let part3 = quad_form(&xs, &k2, &xs, dim)
                .add(&quad_form(&ys, &k2, &ys, dim))
                .scale(-4.0);
            part1.add(&part2).add(&part3)
        }
        other => {
            return Err(Error::IndexOutOfRange(format!(
                "block integral index must be 1..=5, got {other}"
            )))
        }
    };
    Ok(poly)
}

/// One of the five independent integrals of the cubic block flow, on the
/// strictly upper chart of size `n`, with exact gradient.
pub fn block_integral_field(n: usize, which: usize) -> Result<ScalarField> {
    Ok(block_integral_poly(n, which)?.into_field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    /// Direct matrix evaluation of the same integrals, as an independent
    /// oracle against the polynomial construction.
    fn direct(n: usize, which: usize, x: &DVector<f64>) -> f64 {
        let rho = Chart::Upper { n }.unpack(x).unwrap();
        let m = n - 2;
        let a = rho[(0, 1)];
        let xv = DVector::from_fn(m, |j, _| rho[(0, j + 2)]);
        let yv = DVector::from_fn(m, |j, _| rho[(1, j + 2)]);
        let d = DMatrix::from_fn(m, m, |p, q| rho[(p + 2, q + 2)]);
        let k = &d - d.transpose();
        let k2 = &k * &k;
        match which {
            1 => -2.0 * a * a + k2.trace(),
            2 => xv.norm_squared() + yv.norm_squared(),
            3 => (&k2 * &k2).trace() + 2.0 * a.powi(4),
            4 => {
                let (na, nb) = (xv.norm_squared(), yv.norm_squared());
                let p = xv.dot(&yv);
                (na - nb).powi(2) + 4.0 * p * p + (na + nb).powi(2)
            }
            5 => {
                4.0 * a * a * (xv.norm_squared() + yv.norm_squared())
                    + 8.0 * a * (xv.transpose() * &k * &yv)[0]
                    - 4.0 * ((xv.transpose() * &k2 * &xv)[0] + (yv.transpose() * &k2 * &yv)[0])
            }
            _ => unreachable!(),
        }
    }

    fn sample(dim: usize, seed: usize) -> DVector<f64> {
        DVector::from_fn(dim, |i, _| ((i * 13 + seed * 17 + 3) % 23) as f64 / 23.0 - 0.45)
    }

    #[test]
    fn polynomials_match_direct_matrix_evaluation() {
        for n in [3, 5, 6] {
            let dim = Chart::Upper { n }.dim();
            for which in 1..=5 {
                let field = block_integral_field(n, which).unwrap();
                for seed in 0..4 {
                    let x = sample(dim, seed + which);
                    let want = direct(n, which, &x);
                    let got = field.value(&x);
                    assert!(
                        (got - want).abs() < 1e-12 * (1.0 + want.abs()),
                        "n={n} h{which}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let n = 5;
        let dim = Chart::Upper { n }.dim();
        for which in [3, 5] {
            let field = block_integral_field(n, which).unwrap();
            let x = sample(dim, 9 + which);
            let g = field.gradient(&x);
            let mut xs = x.clone();
            for i in 0..dim {
                let h = 1e-5 * (1.0 + x[i].abs());
                xs[i] = x[i] + h;
                let fp = field.value(&xs);
                xs[i] = x[i] - h;
                let fm = field.value(&xs);
                xs[i] = x[i];
                let fd = (fp - fm) / (2.0 * h);
                assert!((g[i] - fd).abs() < 1e-6 * (1.0 + fd.abs()), "i={i}");
            }
        }
    }

    #[test]
    fn rejects_sizes_without_a_trailing_block() {
        assert!(block_integral_field(2, 1).is_err());
        assert!(block_integral_field(5, 0).is_err());
        assert!(block_integral_field(5, 6).is_err());
    }
}
