use nalgebra::DVector;

use crate::poisson::ScalarField;

/// Sparse multivariate polynomial in packed chart coordinates.
///
/// Monomials store their coordinate indices with repetition (sorted), so a
/// term `c * x_2^2 * x_5` is held as `(c, [2, 2, 5])`. Products and squares
/// stay exact, and gradients are assembled term by term, which is what the
/// closed-form conserved quantities need: evaluation and differentiation
/// without any finite differencing.
#[derive(Debug, Clone, Default)]
pub struct Poly {
    dim: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.push(c, &[]);
        p
    }

    pub fn coord(dim: usize, u: usize) -> Self {
        let mut p = Self::zero(dim);
        p.push(1.0, &[u]);
        p
    }

    pub fn monomial(dim: usize, c: f64, idxs: &[usize]) -> Self {
        let mut p = Self::zero(dim);
        p.push(c, idxs);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds the term `c * prod x_{idxs}` in place.
    pub fn push(&mut self, c: f64, idxs: &[usize]) {
        if c == 0.0 {
            return;
        }
        debug_assert!(idxs.iter().all(|&u| u < self.dim));
        let mut key: Vec<u32> = idxs.iter().map(|&u| u as u32).collect();
        key.sort_unstable();
        if let Some(t) = self.terms.iter_mut().find(|t| t.1 == key) {
            t.0 += c;
            if t.0 == 0.0 {
                let k = key;
                self.terms.retain(|t| t.1 != k);
            }
        } else {
            self.terms.push((c, key));
        }
    }

    pub fn add(mut self, other: &Poly) -> Poly {
        assert_eq!(self.dim, other.dim);
        for (c, key) in &other.terms {
            let idxs: Vec<usize> = key.iter().map(|&u| u as usize).collect();
            self.push(*c, &idxs);
        }
        self
    }

    pub fn scale(mut self, s: f64) -> Poly {
        if s == 0.0 {
            self.terms.clear();
        } else {
            for t in &mut self.terms {
                t.0 *= s;
            }
        }
        self
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.dim, other.dim);
        let mut out = Poly::zero(self.dim);
        for (ca, ka) in &self.terms {
            for (cb, kb) in &other.terms {
                let mut idxs: Vec<usize> = ka.iter().map(|&u| u as usize).collect();
                idxs.extend(kb.iter().map(|&u| u as usize));
                out.push(ca * cb, &idxs);
            }
        }
        out
    }

    pub fn square(&self) -> Poly {
        self.mul(self)
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        let mut total = 0.0;
        for (c, key) in &self.terms {
            let mut m = *c;
            for &u in key {
                m *= x[u as usize];
            }
            total += m;
        }
        total
    }

    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim);
        for (c, key) in &self.terms {
            for p in 0..key.len() {
                let mut m = *c;
                for (q, &u) in key.iter().enumerate() {
                    if q != p {
                        m *= x[u as usize];
                    }
                }
                g[key[p] as usize] += m;
            }
        }
        g
    }

    /// Wraps the polynomial as a scalar field with its exact gradient.
    pub fn into_field(self) -> ScalarField {
        let dim = self.dim;
        let p_eval = self.clone();
        let p_grad = self;
        ScalarField::with_grad(
            dim,
            move |x: &DVector<f64>| p_eval.eval(x),
            move |x: &DVector<f64>| p_grad.grad(x),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_grad_match_hand_values() {
        // p = 3 x0^2 x1 - 2 x2 + 5
        let mut p = Poly::zero(3);
        p.push(3.0, &[0, 0, 1]);
        p.push(-2.0, &[2]);
        p.push(5.0, &[]);
        let x = DVector::from_column_slice(&[2.0, -1.0, 0.5]);
        assert_eq!(p.eval(&x), 3.0 * 4.0 * (-1.0) - 1.0 + 5.0);
        let g = p.grad(&x);
        assert_eq!(g[0], 3.0 * 2.0 * 2.0 * (-1.0));
        assert_eq!(g[1], 3.0 * 4.0);
        assert_eq!(g[2], -2.0);
    }

    #[test]
    fn square_matches_product_and_merges_terms() {
        // (x0 + 2 x1)^2 = x0^2 + 4 x0 x1 + 4 x1^2
        let p = Poly::coord(2, 0).add(&Poly::monomial(2, 2.0, &[1]));
        let sq = p.square();
        let x = DVector::from_column_slice(&[1.5, -0.5]);
        let direct = (1.5 - 1.0) * (1.5 - 1.0);
        assert!((sq.eval(&x) - direct).abs() < 1e-15);
        // Gradient check against finite differences.
        let f = sq.clone().into_field();
        let mut fd = ScalarField::new(2, move |v: &DVector<f64>| sq.eval(v));
        fd.set_fd_step(1e-6);
        assert!((f.gradient(&x) - fd.gradient(&x)).amax() < 1e-8);
    }
}
