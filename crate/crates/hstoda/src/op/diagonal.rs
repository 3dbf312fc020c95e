/// A finite diagonal of a banded operator: a plain list of reals indexed by
/// position along the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalVector {
    d: Vec<f64>,
}

impl DiagonalVector {
    pub fn new(d: Vec<f64>) -> Self {
        Self { d }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.d
    }

    /// Entry at position `n`, returning zero outside the stored range. The
    /// shift identities below rely on this zero-padding convention.
    pub fn get(&self, n: usize) -> f64 {
        self.d.get(n).copied().unwrap_or(0.0)
    }
}

/// Downward shift by `i` places: `(shift_down(x, i))_n = x_{n+i}`, padding the
/// freed tail positions with zeros. `shift_down(x, 0)` is the identity.
pub fn shift_down(x: &DiagonalVector, i: usize) -> DiagonalVector {
    let n = x.len();
    let d = (0..n).map(|m| x.get(m + i)).collect();
    DiagonalVector::new(d)
}

/// Upward shift by `l` places: prepends `l` zeros and drops the tail, so
/// `(shift_up(x, l))_n = x_{n-l}` for `n >= l` and zero otherwise.
pub fn shift_up(x: &DiagonalVector, l: usize) -> DiagonalVector {
    let n = x.len();
    let d = (0..n)
        .map(|m| if m >= l { x.get(m - l) } else { 0.0 })
        .collect();
    DiagonalVector::new(d)
}
