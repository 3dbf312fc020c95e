use nalgebra::DVector;

use super::bracket::{bracket, BracketKind};
use super::field::ScalarField;
use crate::error::{Error, Result};
use crate::op::{build_alpha, DeformationSequence};

/// One compatibility band of a passing sequence pair: a closed index
/// interval delimited by zero entries (of either sequence), containing at
/// most one index where the sequences differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    /// First index of the band (inclusive).
    pub lo: usize,
    /// Last index of the band (inclusive).
    pub hi: usize,
    /// The unique differing index inside the band, if any.
    pub differing: Option<usize>,
}

/// Outcome of the compatibility test for a pair of deformation sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PencilVerdict {
    /// The two deformed brackets combine linearly; the bands describe where
    /// the sequences may differ.
    Pass { bands: Vec<Band> },
    /// Incompatible pair, with an index pair witnessing the violated
    /// product condition.
    Fail { witness: (usize, usize) },
}

/// Classifies a sequence pair by the band rule: split `0..N-1` into closed
/// intervals at every index where either sequence vanishes (intervals share
/// their zero endpoints); the pair passes exactly when each interval contains
/// at most one index where the sequences differ.
///
/// On failure the returned witness `(i, j)` is a pair of differing indices
/// violating the product condition checked by [`pencil_violation`].
pub fn pencil_classify(
    a: &DeformationSequence,
    b: &DeformationSequence,
) -> Result<PencilVerdict> {
    let n = a.n_size();
    if b.n_size() != n {
        return Err(Error::ShapeMismatch(format!(
            "sequence lengths {} and {} differ",
            n,
            b.n_size()
        )));
    }
    let differing: Vec<usize> = (0..n).filter(|&i| a.get(i) != b.get(i)).collect();
    let zeros: Vec<usize> = (0..n)
        .filter(|&i| a.get(i) == 0.0 || b.get(i) == 0.0)
        .collect();

    // Closed bands between consecutive zero indices, with sentinels just
    // outside the index range. Consecutive zeros produce two-point bands.
    let mut boundaries: Vec<i64> = Vec::with_capacity(zeros.len() + 2);
    boundaries.push(-1);
    boundaries.extend(zeros.iter().map(|&z| z as i64));
    boundaries.push(n as i64);

    let mut bands = Vec::new();
    for w in boundaries.windows(2) {
        let lo = w[0].max(0) as usize;
        let hi = (w[1].min(n as i64 - 1)) as usize;
        if lo > hi {
            continue;
        }
        let in_band: Vec<usize> = differing
            .iter()
            .copied()
            .filter(|&d| d >= lo && d <= hi)
            .collect();
        if in_band.len() > 1 {
            return Ok(PencilVerdict::Fail {
                witness: (in_band[0], in_band[1]),
            });
        }
        bands.push(Band {
            lo,
            hi,
            differing: in_band.first().copied(),
        });
    }
    Ok(PencilVerdict::Pass { bands })
}

/// Direct scan of the product condition: returns the first pair `i < j` with
/// `(a_i...a_{j-1} - b_i...b_{j-1}) (a_j - b_j) != 0`, or `None` when the
/// pair is compatible.
///
/// Comparisons are exact: for a passing pair every factor either cancels
/// bitwise (identical subproducts) or is annihilated by a zero entry.
pub fn pencil_violation(
    a: &DeformationSequence,
    b: &DeformationSequence,
) -> Result<Option<(usize, usize)>> {
    let n = a.n_size();
    if b.n_size() != n {
        return Err(Error::ShapeMismatch(format!(
            "sequence lengths {} and {} differ",
            n,
            b.n_size()
        )));
    }
    let alpha = build_alpha(a);
    let beta = build_alpha(b);
    for j in 1..n {
        if a.get(j) == b.get(j) {
            continue;
        }
        for i in 0..j {
            if alpha.get(i, j) != beta.get(i, j) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Residual of bracket linearity under sequence blending:
/// `|{f,g}_{blend} - p {f,g}_alpha - (1-p) {f,g}_beta|` at `x`, where the
/// blend deforms along `p a + (1-p) b`. Vanishes (to rounding) exactly for
/// passing pairs.
pub fn pencil_linearity_residual(
    a: &DeformationSequence,
    b: &DeformationSequence,
    p: f64,
    f: &ScalarField,
    g: &ScalarField,
    x: &DVector<f64>,
) -> Result<f64> {
    let blend = a.blend(b, p)?;
    let kc = BracketKind::PlusAlpha {
        alpha: build_alpha(&blend),
    };
    let ka = BracketKind::PlusAlpha {
        alpha: build_alpha(a),
    };
    let kb = BracketKind::PlusAlpha {
        alpha: build_alpha(b),
    };
    let vc = bracket(&kc, f, g, x)?;
    let va = bracket(&ka, f, g, x)?;
    let vb = bracket(&kb, f, g, x)?;
    Ok((vc - p * va - (1.0 - p) * vb).abs())
}
