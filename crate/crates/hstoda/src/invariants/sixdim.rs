use super::poly::Poly;
use crate::error::{Error, Result};
use crate::op::AlphaCoefficients;
use crate::poisson::{idx_upper, Chart, ScalarField};

const N: usize = 6;

fn check_sixdim(alpha: &AlphaCoefficients) -> Result<()> {
    if alpha.n_size() != N {
        return Err(Error::ShapeMismatch(format!(
            "closed Casimirs are implemented for size 6, got {}",
            alpha.n_size()
        )));
    }
    // The closed polynomial weights below absorb the final sequence entry,
    // so they are stated for sequences normalised to end in one.
    if alpha.sequence()[N - 1] != 1.0 {
        return Err(Error::InvalidSequence(
            "closed Casimirs require the final sequence entry to equal 1".into(),
        ));
    }
    Ok(())
}

/// Product of sequence entries with multiplicity, e.g. `[1, 3, 3]` gives
/// `a_1 * a_3^2`.
fn weight(alpha: &AlphaCoefficients, factors: &[usize]) -> f64 {
    factors.iter().map(|&i| alpha.sequence()[i]).product()
}

type PairTerm = (f64, (usize, usize), (usize, usize));

/// Builds the quadratic `sum c * rho_{p} rho_{q}` over upper index pairs.
fn pair_poly(dim: usize, terms: &[PairTerm]) -> Poly {
    let mut p = Poly::zero(dim);
    for &(c, (i1, j1), (i2, j2)) in terms {
        p.push(c, &[idx_upper(N, i1, j1), idx_upper(N, i2, j2)]);
    }
    p
}

/// Degree-four Casimir of the deformed bracket at size 6, as a closed
/// polynomial: a weighted sum of fifteen squared three-term quadratics.
/// Valid for any sequence with final entry one, including sequences with
/// vanishing entries.
pub fn sixdim_c2_field(alpha: &AlphaCoefficients) -> Result<ScalarField> {
    Ok(sixdim_c2_poly(alpha)?.into_field())
}

pub(crate) fn sixdim_c2_poly(alpha: &AlphaCoefficients) -> Result<Poly> {
    check_sixdim(alpha)?;
    let dim = Chart::Upper { n: N }.dim();
    let a = |f: &[usize]| weight(alpha, f);
    // Each row: (outer weight factors, inner quadratic). The inner quadratic
    // is `c1 rho_p1 rho_q1 - rho_p2 rho_q2 + rho_p3 rho_q3` with `c1` a
    // product of sequence entries.
    struct Row {
        outer: &'static [usize],
        c1: &'static [usize],
        p: [(usize, usize); 3],
    }
    let rows = [
        Row { outer: &[0, 1, 1, 2], c1: &[3], p: [(2, 3), (2, 4), (2, 5)] },
        Row { outer: &[0, 1, 2], c1: &[3], p: [(1, 3), (1, 4), (1, 5)] },
        Row { outer: &[0, 1], c1: &[2, 3], p: [(1, 2), (1, 4), (1, 5)] },
        Row { outer: &[1, 2], c1: &[3], p: [(0, 3), (0, 4), (0, 5)] },
        Row { outer: &[1], c1: &[2, 3], p: [(0, 2), (0, 4), (0, 5)] },
        Row { outer: &[], c1: &[1, 2, 3], p: [(0, 1), (0, 4), (0, 5)] },
        Row { outer: &[0, 1, 3], c1: &[2], p: [(1, 2), (1, 3), (1, 5)] },
        Row { outer: &[1, 3], c1: &[2], p: [(0, 2), (0, 3), (0, 5)] },
        Row { outer: &[3], c1: &[1, 2], p: [(0, 1), (0, 3), (0, 5)] },
        Row { outer: &[0, 1, 3, 4], c1: &[2], p: [(1, 2), (1, 3), (1, 4)] },
        Row { outer: &[1, 3, 4], c1: &[2], p: [(0, 2), (0, 3), (0, 4)] },
        Row { outer: &[3, 4], c1: &[1, 2], p: [(0, 1), (0, 3), (0, 4)] },
        Row { outer: &[2, 3], c1: &[1], p: [(0, 1), (0, 2), (0, 5)] },
        Row { outer: &[2, 3, 4], c1: &[1], p: [(0, 1), (0, 2), (0, 4)] },
        Row { outer: &[2, 3, 3, 4], c1: &[1], p: [(0, 1), (0, 2), (0, 3)] },
    ];
    // The partner pairs completing each product are determined by the six
    // indices involved: every row uses three disjoint pairs covering a fixed
    // four- or six-index pattern. They are tabulated explicitly.
    let partners: [[(usize, usize); 3]; 15] = [
        [(4, 5), (3, 5), (3, 4)],
        [(4, 5), (3, 5), (3, 4)],
        [(4, 5), (2, 5), (2, 4)],
        [(4, 5), (3, 5), (3, 4)],
        [(4, 5), (2, 5), (2, 4)],
        [(4, 5), (1, 5), (1, 4)],
        [(3, 5), (2, 5), (2, 3)],
        [(3, 5), (2, 5), (2, 3)],
        [(3, 5), (1, 5), (1, 3)],
        [(3, 4), (2, 4), (2, 3)],
        [(3, 4), (2, 4), (2, 3)],
        [(3, 4), (1, 4), (1, 3)],
        [(2, 5), (1, 5), (1, 2)],
        [(2, 4), (1, 4), (1, 2)],
        [(2, 3), (1, 3), (1, 2)],
    ];
    let mut total = Poly::zero(dim);
    for (row, partner) in rows.iter().zip(partners.iter()) {
        let quad = pair_poly(
            dim,
            &[
                (a(row.c1), row.p[0], partner[0]),
                (-1.0, row.p[1], partner[1]),
                (1.0, row.p[2], partner[2]),
            ],
        );
        total = total.add(&quad.square().scale(a(row.outer)));
    }
    Ok(total)
}

/// Degree-six Casimir of the deformed bracket at size 6: the square of a
/// fifteen-term cubic. Valid for any sequence with final entry one.
pub fn sixdim_c3_field(alpha: &AlphaCoefficients) -> Result<ScalarField> {
    Ok(sixdim_c3_poly(alpha)?.into_field())
}

pub(crate) fn sixdim_c3_poly(alpha: &AlphaCoefficients) -> Result<Poly> {
    check_sixdim(alpha)?;
    let dim = Chart::Upper { n: N }.dim();
    let a = |f: &[usize]| weight(alpha, f);
    type Triple = (f64, [(usize, usize); 3]);
    let terms: Vec<Triple> = vec![
        (a(&[1, 2, 3]), [(0, 1), (2, 3), (4, 5)]),
        (-a(&[2, 3]), [(0, 2), (1, 3), (4, 5)]),
        (a(&[2, 3]), [(0, 3), (1, 2), (4, 5)]),
        (-a(&[1, 2]), [(0, 1), (2, 4), (3, 5)]),
        (a(&[2]), [(0, 2), (1, 4), (3, 5)]),
        (-a(&[2]), [(0, 4), (1, 2), (3, 5)]),
        (a(&[1, 2]), [(0, 1), (2, 5), (3, 4)]),
        (-a(&[2]), [(0, 2), (1, 5), (3, 4)]),
        (a(&[2]), [(0, 5), (1, 2), (3, 4)]),
        (-1.0, [(0, 3), (1, 4), (2, 5)]),
        (1.0, [(0, 4), (1, 3), (2, 5)]),
        (1.0, [(0, 3), (1, 5), (2, 4)]),
        (-1.0, [(0, 5), (1, 3), (2, 4)]),
        (-1.0, [(0, 4), (1, 5), (2, 3)]),
        (1.0, [(0, 5), (1, 4), (2, 3)]),
    ];
    let mut cubic = Poly::zero(dim);
    for (c, pairs) in terms {
        cubic.push(
            c,
            &[
                idx_upper(N, pairs[0].0, pairs[0].1),
                idx_upper(N, pairs[1].0, pairs[1].1),
                idx_upper(N, pairs[2].0, pairs[2].1),
            ],
        );
    }
    Ok(cubic.square())
}
