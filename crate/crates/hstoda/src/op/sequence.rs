use crate::error::{Error, Result};

/// A finite deformation sequence `a_0, ..., a_{N-1}` with `N >= 2` and every
/// entry bounded by one in absolute value.
///
/// Consecutive products of the entries populate the coefficient table of
/// [`super::AlphaCoefficients`]. The all-ones sequence reproduces the
/// undeformed triangular algebra, while zeros cut the algebra into
/// decoupled bands.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationSequence {
    a: Vec<f64>,
}

impl DeformationSequence {
    /// Validates and wraps a sequence. Requires `a.len() >= 2`, finite
    /// entries, and `|a_i| <= 1` for every entry.
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidSequence(format!(
                "need at least 2 entries, got {}",
                a.len()
            )));
        }
        for (i, &v) in a.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidSequence(format!(
                    "entry {i} is not finite: {v}"
                )));
            }
            if v.abs() > 1.0 {
                return Err(Error::InvalidSequence(format!(
                    "entry {i} has |a_{i}| = {} > 1",
                    v.abs()
                )));
            }
        }
        Ok(Self { a })
    }

    /// The undeformed sequence `(1, 1, ..., 1)` of length `n`.
    pub fn ones(n: usize) -> Self {
        assert!(n >= 2, "sequence length must be at least 2");
        Self { a: vec![1.0; n] }
    }

    /// The fully degenerate sequence `(0, 0, ..., 0)` of length `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2, "sequence length must be at least 2");
        Self { a: vec![0.0; n] }
    }

    /// The truncation size `N` (number of entries).
    pub fn n_size(&self) -> usize {
        self.a.len()
    }

    /// Borrow the raw entries.
    pub fn entries(&self) -> &[f64] {
        &self.a
    }

    /// Entry `a_i`. Panics if `i` is out of range.
    pub fn get(&self, i: usize) -> f64 {
        self.a[i]
    }

    /// Entrywise convex blend `p * a + (1 - p) * b`.
    ///
    /// Entries that agree bitwise are copied through unchanged so that the
    /// blend of a sequence with itself is exactly the sequence; this keeps
    /// blended coefficient tables free of spurious rounding at indices the
    /// two sequences share.
    pub fn blend(&self, other: &Self, p: f64) -> Result<Self> {
        if self.n_size() != other.n_size() {
            return Err(Error::ShapeMismatch(format!(
                "blend of sequences with lengths {} and {}",
                self.n_size(),
                other.n_size()
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidSequence(format!(
                "blend weight must lie in [0, 1], got {p}"
            )));
        }
        let a = self
            .a
            .iter()
            .zip(&other.a)
            .map(|(&x, &y)| if x == y { x } else { p * x + (1.0 - p) * y })
            .collect();
        Self::new(a)
    }
}
