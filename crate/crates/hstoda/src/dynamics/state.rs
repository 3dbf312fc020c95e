//! State charts for the cubic flow pipeline: real block coordinates, the
//! complex vector form, the normal-form reduction to 2x2 blocks, and the
//! rotating frame.

use crate::error::{Error, Result};
use crate::op::{strictly_upper, Mat};
use crate::poisson::{idx_upper, Chart};
use nalgebra::{DVector, SymmetricEigen, Vector2};
use num_complex::Complex64;

/// Real coordinates of an upper point at size `n`: the scalar `a = rho_01`,
/// the vectors `x` and `y` of length `n - 2` from the first two rows, and
/// the strictly upper trailing block `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    pub a: f64,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub delta: Mat,
}

impl BlockState {
    pub fn new(a: f64, x: DVector<f64>, y: DVector<f64>, delta: Mat) -> Result<Self> {
        let s = Self { a, x, y, delta };
        s.validate()?;
        Ok(s)
    }

    /// Truncation size `n` (the block vectors have length `n - 2`).
    pub fn n_size(&self) -> usize {
        self.x.len() + 2
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.x.len();
        if self.y.len() != m || self.delta.nrows() != m || self.delta.ncols() != m {
            return Err(Error::ShapeMismatch(format!(
                "block parts disagree: x {}, y {}, delta {}x{}",
                m,
                self.y.len(),
                self.delta.nrows(),
                self.delta.ncols()
            )));
        }
        for i in 0..m {
            for j in 0..=i {
                if self.delta[(i, j)] != 0.0 {
                    return Err(Error::ShapeMismatch(
                        "trailing block must be strictly upper triangular".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Packs into the strictly upper chart at size `n`.
    pub fn pack(&self) -> DVector<f64> {
        let n = self.n_size();
        let chart = Chart::Upper { n };
        let mut out = DVector::zeros(chart.dim());
        out[idx_upper(n, 0, 1)] = self.a;
        for j in 0..self.x.len() {
            out[idx_upper(n, 0, j + 2)] = self.x[j];
            out[idx_upper(n, 1, j + 2)] = self.y[j];
        }
        for p in 0..self.x.len() {
            for q in (p + 1)..self.x.len() {
                out[idx_upper(n, p + 2, q + 2)] = self.delta[(p, q)];
            }
        }
        out
    }

    /// Reads the block parts out of a packed strictly upper point.
    pub fn unpack(n: usize, v: &DVector<f64>) -> Result<Self> {
        let chart = Chart::Upper { n };
        if n < 3 || v.len() != chart.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected an upper point of size {n}, got length {}",
                v.len()
            )));
        }
        let m = n - 2;
        let a = v[idx_upper(n, 0, 1)];
        let x = DVector::from_fn(m, |j, _| v[idx_upper(n, 0, j + 2)]);
        let y = DVector::from_fn(m, |j, _| v[idx_upper(n, 1, j + 2)]);
        let delta = Mat::from_fn(m, m, |p, q| {
            if p < q {
                v[idx_upper(n, p + 2, q + 2)]
            } else {
                0.0
            }
        });
        Ok(Self { a, x, y, delta })
    }

    pub fn to_complex(&self) -> ComplexState {
        let z = DVector::from_fn(self.x.len(), |j, _| Complex64::new(self.x[j], self.y[j]));
        ComplexState {
            z,
            a: self.a,
            delta: self.delta.clone(),
        }
    }
}

/// The complex form `z = x + i y` of a block point; `a` and the trailing
/// block ride along as parameters of the cubic flow.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexState {
    pub z: DVector<Complex64>,
    pub a: f64,
    pub delta: Mat,
}

impl ComplexState {
    pub fn to_block(&self) -> BlockState {
        BlockState {
            a: self.a,
            x: self.z.map(|c| c.re),
            y: self.z.map(|c| c.im),
            delta: self.delta.clone(),
        }
    }

    /// The conserved norm `conj(z)^T z`.
    pub fn c2(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }

    /// The complex invariant `z^T z` (its modulus is conserved).
    pub fn zt_z(&self) -> Complex64 {
        self.z.iter().map(|c| c * c).sum()
    }

    /// Skew part of the trailing block.
    pub fn skew(&self) -> Mat {
        &self.delta - self.delta.transpose()
    }
}

/// Normal form of the skew part of a strictly upper block: a real
/// orthogonal `o` with `o (delta - delta^T) o^T` block diagonal, blocks
/// `lambda_k [[0, 1], [-1, 0]]` with `lambda` sorted descending (zero
/// blocks allowed), plus one scalar zero row when the size is odd.
pub fn skew_normal_form(delta: &Mat) -> Result<(Mat, Vec<f64>)> {
    let m = delta.nrows();
    if delta.ncols() != m {
        return Err(Error::ShapeMismatch("trailing block must be square".into()));
    }
    if (strictly_upper(delta) - delta).amax() > 0.0 {
        return Err(Error::ShapeMismatch(
            "trailing block must be strictly upper triangular".into(),
        ));
    }
    let k = delta - delta.transpose();
    let s = &k.transpose() * &k;
    let eig = SymmetricEigen::new(s);
    let scale = eig.eigenvalues.amax().max(1.0);
    let zero_tol = 1e-12 * scale;
    let cluster_tol = 1e-10 * scale;

    // Sort eigenpairs by eigenvalue descending.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("finite eigenvalues")
    });

    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut lambdas = Vec::new();
    let mut kernel: Vec<DVector<f64>> = Vec::new();
    let mut idx = 0;
    while idx < m {
        let lam2 = eig.eigenvalues[order[idx]];
        if lam2 <= zero_tol {
            kernel.push(eig.eigenvectors.column(order[idx]).into_owned());
            idx += 1;
            continue;
        }
        // Collect the whole cluster of (numerically) equal eigenvalues.
        let mut cluster = vec![order[idx]];
        let mut j = idx + 1;
        while j < m && (eig.eigenvalues[order[j]] - lam2).abs() <= cluster_tol {
            cluster.push(order[j]);
            j += 1;
        }
        let lam = (cluster.iter().map(|&c| eig.eigenvalues[c]).sum::<f64>()
            / cluster.len() as f64)
            .sqrt();
        let mut pair_rows: Vec<DVector<f64>> = Vec::new();
        for &c in &cluster {
            let mut u = eig.eigenvectors.column(c).into_owned();
            for r in &pair_rows {
                let proj = u.dot(r);
                u -= r * proj;
            }
            if u.norm() < 1e-8 {
                continue; // already spanned by an accepted pair
            }
            u /= u.norm();
            let v = (&k * &u) / lam;
            pair_rows.push(v);
            pair_rows.push(u);
        }
        for pair in pair_rows.chunks(2) {
            let (mut v, mut u) = (pair[0].clone(), pair[1].clone());
            if leading_entry_negative(&v) {
                v = -v;
                u = -u;
            }
            rows.push(v);
            rows.push(u);
            lambdas.push(lam);
        }
        idx = j;
    }
    // Kernel vectors form zero blocks (pairs), plus a final scalar row when
    // the dimension is odd.
    for pair in kernel.chunks(2) {
        if pair.len() == 2 {
            lambdas.push(0.0);
        }
        for vec in pair {
            let mut v = vec.clone();
            if leading_entry_negative(&v) {
                v = -v;
            }
            rows.push(v);
        }
    }
    let o = Mat::from_fn(m, m, |i, j| rows[i][j]);
    Ok((o, lambdas))
}

fn leading_entry_negative(v: &DVector<f64>) -> bool {
    v.iter().find(|e| e.abs() > 1e-8).is_some_and(|&e| e < 0.0)
}

/// A complex point expressed in the normal-form frame: 2-vectors per block,
/// an optional scalar for odd sizes, the block frequencies, and the frame.
#[derive(Debug, Clone)]
pub struct ReducedState {
    pub xi: Vec<Vector2<Complex64>>,
    pub xi0: Option<Complex64>,
    pub lambdas: Vec<f64>,
    pub o: Mat,
}

impl ReducedState {
    /// Reduces a complex point by the normal form of its trailing block.
    pub fn from_complex(state: &ComplexState) -> Result<Self> {
        let (o, lambdas) = skew_normal_form(&state.delta)?;
        let m = state.z.len();
        if o.nrows() != m {
            return Err(Error::ShapeMismatch(
                "trailing block size must match the vector length".into(),
            ));
        }
        let xi_full: Vec<Complex64> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| state.z[c] * o[(r, c)])
                    .sum::<Complex64>()
            })
            .collect();
        let blocks = m / 2;
        let xi = (0..blocks)
            .map(|b| Vector2::new(xi_full[2 * b], xi_full[2 * b + 1]))
            .collect();
        let xi0 = (m % 2 == 1).then(|| xi_full[m - 1]);
        Ok(Self {
            xi,
            xi0,
            lambdas,
            o,
        })
    }

    /// Rebuilds the complex point `z = o^T xi` with the given parameters.
    pub fn to_complex(&self, a: f64, delta: &Mat) -> ComplexState {
        let m = self.o.nrows();
        let mut xi_full = Vec::with_capacity(m);
        for v in &self.xi {
            xi_full.push(v[0]);
            xi_full.push(v[1]);
        }
        if let Some(s) = self.xi0 {
            xi_full.push(s);
        }
        let z = DVector::from_fn(m, |c, _| {
            (0..m)
                .map(|r| xi_full[r] * self.o[(r, c)])
                .sum::<Complex64>()
        });
        ComplexState {
            z,
            a,
            delta: delta.clone(),
        }
    }

    /// `z^T z` expressed in the frame: the sum of `xi_k^T xi_k` (+ `xi0^2`).
    pub fn quad_sum(&self) -> Complex64 {
        let mut s: Complex64 = self
            .xi
            .iter()
            .map(|v| v[0] * v[0] + v[1] * v[1])
            .sum();
        if let Some(x0) = self.xi0 {
            s += x0 * x0;
        }
        s
    }

    /// `conj(z)^T z` expressed in the frame.
    pub fn c2(&self) -> f64 {
        let mut s: f64 = self
            .xi
            .iter()
            .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
            .sum();
        if let Some(x0) = self.xi0 {
            s += x0.norm_sqr();
        }
        s
    }

    /// The per-block invariant `lambda_k conj(xi)^T xi - i a conj(xi)^T eps xi`
    /// (real); zero for the scalar component.
    pub fn block_invariants(&self, a: f64) -> Vec<f64> {
        self.xi
            .iter()
            .zip(&self.lambdas)
            .map(|(v, &lam)| {
                let t = v[0].norm_sqr() + v[1].norm_sqr();
                // conj(xi)^T eps xi = conj(xi_1) xi_2 - conj(xi_2) xi_1 (imaginary)
                let eps = v[0].conj() * v[1] - v[1].conj() * v[0];
                lam * t - (Complex64::i() * a * eps).re
            })
            .collect()
    }
}

/// Scalars of one 2-vector component used throughout the rotated frame:
/// `t = |u|^2 + |v|^2`, `p = u.v`, `d = det[u, v]` for `xi = u + iv`.
#[derive(Debug, Clone, Copy)]
pub struct ComponentScalars {
    pub t: f64,
    pub p: f64,
    pub d: f64,
}

pub(crate) fn component_scalars(v: &Vector2<Complex64>) -> ComponentScalars {
    let u = Vector2::new(v[0].re, v[1].re);
    let w = Vector2::new(v[0].im, v[1].im);
    ComponentScalars {
        t: u.norm_squared() + w.norm_squared(),
        p: u.dot(&w),
        d: u[0] * w[1] - u[1] * w[0],
    }
}

/// The rotating-frame chart: per component `q + i p = e^{-i phi} xi^T xi`
/// and the signed radius `r = a t + 2 lambda d`, plus the frame phase.
/// Component order follows [`ReducedState`]: the 2x2 blocks (descending
/// frequency) followed by the scalar component for odd sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub phi: f64,
}

impl RotatedState {
    /// Builds the rotating-frame coordinates of a reduced point. The phase
    /// is chosen so that `sum_k (q_k + i p_k)` is real and nonnegative.
    pub fn from_reduced(state: &ReducedState, a: f64) -> Self {
        let mut etas: Vec<Complex64> = state
            .xi
            .iter()
            .map(|v| v[0] * v[0] + v[1] * v[1])
            .collect();
        let mut rs: Vec<f64> = state
            .xi
            .iter()
            .zip(&state.lambdas)
            .map(|(v, &lam)| {
                let s = component_scalars(v);
                a * s.t + 2.0 * lam * s.d
            })
            .collect();
        if let Some(x0) = state.xi0 {
            etas.push(x0 * x0);
            rs.push(a * x0.norm_sqr());
        }
        let total: Complex64 = etas.iter().sum();
        let phi = if total.norm() > 0.0 { total.arg() } else { 0.0 };
        let rot = Complex64::from_polar(1.0, -phi);
        let q = etas.iter().map(|e| (rot * e).re).collect();
        let p = etas.iter().map(|e| (rot * e).im).collect();
        Self { q, p, r: rs, phi }
    }

    /// The frame radius `rho = |sum eta|` implied by the stored coordinates.
    pub fn rho(&self) -> f64 {
        let qr: f64 = self.q.iter().sum();
        let pr: f64 = self.p.iter().sum();
        (qr * qr + pr * pr).sqrt()
    }

    /// Recovers the per-component quadratic forms `eta_k = e^{i phi}(q + ip)`.
    pub fn etas(&self) -> Vec<Complex64> {
        let rot = Complex64::from_polar(1.0, self.phi);
        self.q
            .iter()
            .zip(&self.p)
            .map(|(&q, &p)| rot * Complex64::new(q, p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strict_upper_from(vals: &[f64], m: usize) -> Mat {
        let mut d = Mat::zeros(m, m);
        let mut it = vals.iter();
        for p in 0..m {
            for q in (p + 1)..m {
                d[(p, q)] = *it.next().expect("enough entries");
            }
        }
        d
    }

    #[test]
    fn block_pack_round_trips_and_matches_chart() {
        let m = 3;
        let delta = strict_upper_from(&[0.3, -0.2, 0.5], m);
        let s = BlockState::new(
            0.7,
            DVector::from_vec(vec![1.0, -0.5, 0.25]),
            DVector::from_vec(vec![0.1, 0.2, -0.3]),
            delta,
        )
        .unwrap();
        let packed = s.pack();
        let back = BlockState::unpack(s.n_size(), &packed).unwrap();
        assert_eq!(back, s);
        // The packed layout is literally the upper chart of the matrix.
        let rho = Chart::Upper { n: 5 }.unpack(&packed).unwrap();
        assert_eq!(rho[(0, 1)], 0.7);
        assert_eq!(rho[(0, 3)], -0.5);
        assert_eq!(rho[(1, 2)], 0.1);
        assert_eq!(rho[(2, 3)], 0.3);
    }

    #[test]
    fn complex_round_trip_preserves_parts() {
        let m = 2;
        let s = BlockState::new(
            -0.4,
            DVector::from_vec(vec![0.6, 0.1]),
            DVector::from_vec(vec![-0.2, 0.9]),
            strict_upper_from(&[1.2], m),
        )
        .unwrap();
        let c = s.to_complex();
        assert_eq!(c.z[1], Complex64::new(0.1, 0.9));
        assert_eq!(c.to_block(), s);
        assert!((c.c2() - (0.36 + 0.01 + 0.04 + 0.81)).abs() < 1e-15);
    }

    #[test]
    fn skew_normal_form_round_trips_random_blocks() {
        let m = 6;
        let vals: Vec<f64> = (0..m * (m - 1) / 2)
            .map(|i| ((i * 23 + 7) % 19) as f64 / 19.0 - 0.4)
            .collect();
        let delta = strict_upper_from(&vals, m);
        let (o, lambdas) = skew_normal_form(&delta).unwrap();
        // Orthogonality.
        assert!((&o * o.transpose() - Mat::identity(m, m)).amax() < 1e-12);
        // Descending frequencies.
        for w in lambdas.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        // Block reconstruction.
        let k = &delta - delta.transpose();
        let normal = &o * &k * o.transpose();
        let mut expected = Mat::zeros(m, m);
        for (b, &lam) in lambdas.iter().enumerate() {
            expected[(2 * b, 2 * b + 1)] = lam;
            expected[(2 * b + 1, 2 * b)] = -lam;
        }
        assert!(
            (&normal - &expected).amax() < 1e-10,
            "normal form error {}",
            (&normal - &expected).amax()
        );
    }

    #[test]
    fn skew_normal_form_handles_zero_and_single_block() {
        let (o, lambdas) = skew_normal_form(&Mat::zeros(3, 3)).unwrap();
        assert_eq!(lambdas, vec![0.0]);
        assert!((&o * o.transpose() - Mat::identity(3, 3)).amax() < 1e-14);

        let mut d = Mat::zeros(2, 2);
        d[(0, 1)] = 0.8;
        let (o, lambdas) = skew_normal_form(&d).unwrap();
        assert_eq!(lambdas.len(), 1);
        assert!((lambdas[0] - 0.8).abs() < 1e-13);
        // The frame is the identity up to the sign/rotation gauge of the
        // single block: entries are 0 or +-1 and the block reconstructs.
        for e in o.iter() {
            assert!(e.abs() < 1e-12 || (e.abs() - 1.0).abs() < 1e-12);
        }
        let k = &d - d.transpose();
        let normal = &o * &k * o.transpose();
        assert!((normal[(0, 1)] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn reduction_round_trips_through_the_frame() {
        for m in [4usize, 5] {
            let vals: Vec<f64> = (0..m * (m - 1) / 2)
                .map(|i| ((i * 13 + 5) % 17) as f64 / 17.0 - 0.35)
                .collect();
            let delta = strict_upper_from(&vals, m);
            let z = DVector::from_fn(m, |j, _| {
                Complex64::new(
                    ((j * 7 + 2) % 11) as f64 / 11.0 - 0.3,
                    ((j * 5 + 1) % 13) as f64 / 13.0 - 0.4,
                )
            });
            let cs = ComplexState {
                z,
                a: 0.55,
                delta: delta.clone(),
            };
            let red = ReducedState::from_complex(&cs).unwrap();
            assert_eq!(red.xi0.is_some(), m % 2 == 1);
            let back = red.to_complex(cs.a, &cs.delta);
            let err = (0..m)
                .map(|j| (back.z[j] - cs.z[j]).norm())
                .fold(0.0f64, f64::max);
            assert!(err < 1e-12, "m={m}: {err}");
            // Frame-independent scalars.
            assert!((red.c2() - cs.c2()).abs() < 1e-12);
            assert!((red.quad_sum() - cs.zt_z()).norm() < 1e-12);
        }
    }

    #[test]
    fn rotated_chart_satisfies_the_radius_constraint() {
        let m = 4;
        let vals: Vec<f64> = (0..6).map(|i| 0.3 + 0.1 * i as f64).collect();
        let delta = strict_upper_from(&vals, m);
        let z = DVector::from_fn(m, |j, _| Complex64::new(0.4 - 0.1 * j as f64, 0.2 * j as f64));
        let a = 0.9;
        let cs = ComplexState { z, a, delta };
        let red = ReducedState::from_complex(&cs).unwrap();
        let rot = RotatedState::from_reduced(&red, a);
        // Total is rotated onto the real axis.
        assert!(rot.p.iter().sum::<f64>().abs() < 1e-12);
        assert!(rot.q.iter().sum::<f64>() >= 0.0);
        // r_k^2 = (a^2 - lambda_k^2)(q_k^2 + p_k^2) + c_k^2 per block.
        let cks = red.block_invariants(a);
        for (k, &lam) in red.lambdas.iter().enumerate() {
            let nu = a * a - lam * lam;
            let lhs = rot.r[k] * rot.r[k];
            let rhs = nu * (rot.q[k] * rot.q[k] + rot.p[k] * rot.p[k]) + cks[k] * cks[k];
            assert!((lhs - rhs).abs() < 1e-12, "block {k}: {lhs} vs {rhs}");
        }
        // eta reconstruction.
        let etas = rot.etas();
        let direct: Vec<Complex64> = red
            .xi
            .iter()
            .map(|v| v[0] * v[0] + v[1] * v[1])
            .collect();
        for (e, d) in etas.iter().zip(&direct) {
            assert!((e - d).norm() < 1e-12);
        }
    }
}
