//! Coadjoint-type group and algebra actions on the three dual pictures:
//! the deformed lower-plus-diagonal picture, the undeformed
//! lower-plus-diagonal picture, and the strictly upper annihilator picture.

use crate::error::{Error, Result};
use crate::op::{
    diagonal_part, project_alpha, project_plus_alpha, strictly_lower, AlphaCoefficients, Mat,
};

/// Which dual picture a group element acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    /// Lower-plus-diagonal points, dressed through the deformed embedding
    /// `rho -> rho + alpha(rho_low^T)` before conjugation.
    Alpha,
    /// Lower-plus-diagonal points conjugated directly.
    Minus0,
    /// Strictly upper points, conjugated then reprojected with the deformed
    /// complement projector.
    PlusAlpha,
}

fn require_square(m: &Mat, n: usize, what: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn require_upper_triangular(g: &Mat) -> Result<()> {
    let scale = g.amax();
    for i in 0..g.nrows() {
        for j in 0..i {
            if g[(i, j)].abs() > 1e-12 * scale {
                return Err(Error::ShapeMismatch(
                    "group element must be upper triangular in this picture".into(),
                ));
            }
        }
    }
    Ok(())
}

fn lower_diag(m: &Mat) -> Mat {
    strictly_lower(m) + diagonal_part(m)
}

/// Action of the group element `g` on the dual point `rho` in the chosen
/// picture. For the two lower-plus-diagonal pictures `g` must be an
/// invertible upper triangular matrix; for the annihilator picture any
/// invertible element of the deformed group (exponentials of the deformed
/// algebra) may be supplied.
pub fn coadjoint_action(
    picture: Picture,
    alpha: &AlphaCoefficients,
    g: &Mat,
    rho: &Mat,
) -> Result<Mat> {
    let n = alpha.n_size();
    require_square(g, n, "group element")?;
    require_square(rho, n, "dual point")?;
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMatrix("group element is not invertible".into()))?;
    match picture {
        Picture::Alpha => {
            require_upper_triangular(g)?;
            let dressed = project_alpha(alpha, rho)?;
            Ok(lower_diag(&(g * dressed * g_inv)))
        }
        Picture::Minus0 => {
            require_upper_triangular(g)?;
            Ok(lower_diag(&(g * lower_diag(rho) * g_inv)))
        }
        Picture::PlusAlpha => project_plus_alpha(alpha, &(g * rho * g_inv)),
    }
}

/// Infinitesimal version of [`coadjoint_action`]: the derivative of the
/// action along `x` at the identity is `-ad_star(picture, alpha, x, rho)`.
pub fn ad_star(picture: Picture, alpha: &AlphaCoefficients, x: &Mat, rho: &Mat) -> Result<Mat> {
    let n = alpha.n_size();
    require_square(x, n, "algebra element")?;
    require_square(rho, n, "dual point")?;
    match picture {
        Picture::Alpha => {
            let dressed = project_alpha(alpha, rho)?;
            let c = x * &dressed - dressed * x;
            Ok(lower_diag(&c).scale(-1.0))
        }
        Picture::Minus0 => {
            let ld = lower_diag(rho);
            let c = x * &ld - ld * x;
            Ok(lower_diag(&c).scale(-1.0))
        }
        Picture::PlusAlpha => {
            let c = x * rho - rho * x;
            Ok(project_plus_alpha(alpha, &c)?.scale(-1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{ik_alpha_field, trace_power_alpha_field};
    use crate::op::{basis_e, build_alpha, matrix_exp, DeformationSequence};
    use crate::poisson::bracket::{deformed_direction, minus0_direction};
    use crate::poisson::{ham_vector_field, BracketKind, Chart};
    use nalgebra::DVector;

    fn test_alpha(n: usize) -> AlphaCoefficients {
        let seq: Vec<f64> = (0..n).map(|i| 0.9 - 0.12 * i as f64).collect();
        build_alpha(&DeformationSequence::new(seq).unwrap())
    }

    fn pseudo(seed: usize, i: usize) -> f64 {
        (((i * 29 + seed * 31 + 7) % 37) as f64) / 37.0 - 0.45
    }

    fn random_upper(n: usize, seed: usize) -> Mat {
        Mat::from_fn(n, n, |i, j| {
            if i < j {
                pseudo(seed, i * n + j)
            } else if i == j {
                1.0 + 0.5 * pseudo(seed, 7 * i + 3)
            } else {
                0.0
            }
        })
    }

    fn random_lower_diag(n: usize, seed: usize) -> Mat {
        Mat::from_fn(n, n, |i, j| if i >= j { pseudo(seed, 5 * i + j) } else { 0.0 })
    }

    #[test]
    fn dressed_action_composes_as_a_left_action() {
        let n = 5;
        let alpha = test_alpha(n);
        for picture in [Picture::Alpha, Picture::Minus0] {
            let g1 = random_upper(n, 1);
            let g2 = random_upper(n, 2);
            let rho = random_lower_diag(n, 3);
            let joint = coadjoint_action(picture, &alpha, &(&g1 * &g2), &rho).unwrap();
            let staged = coadjoint_action(
                picture,
                &alpha,
                &g1,
                &coadjoint_action(picture, &alpha, &g2, &rho).unwrap(),
            )
            .unwrap();
            assert!(
                (&joint - &staged).amax() < 1e-11 * (1.0 + joint.amax()),
                "{picture:?}"
            );
        }
    }

    #[test]
    fn annihilator_action_preserves_spectral_invariants() {
        let n = 4;
        let alpha = test_alpha(n);
        let chart = Chart::Upper { n };
        // Group element from the deformed algebra span.
        let mut x = Mat::zeros(n, n);
        for (s, &(i, j)) in [(0usize, 1usize), (1, 3), (0, 2)].iter().enumerate() {
            x += basis_e(&alpha, i, j).unwrap() * (0.3 * pseudo(s, 11));
        }
        let g = matrix_exp(&x);
        let rho = {
            let mut m = Mat::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    m[(i, j)] = pseudo(4, i * n + j);
                }
            }
            m
        };
        let moved = coadjoint_action(Picture::PlusAlpha, &alpha, &g, &rho).unwrap();
        for k in [1usize, 2] {
            let f = ik_alpha_field(&alpha, k).unwrap();
            let before = f.value(&chart.pack(&rho).unwrap());
            let after = f.value(&chart.pack(&moved).unwrap());
            assert!(
                (before - after).abs() < 1e-10 * (1.0 + before.abs()),
                "k={k}: {before} vs {after}"
            );
        }
    }

    #[test]
    fn hamiltonian_field_is_minus_ad_star_of_the_direction() {
        let n = 5;
        let alpha = test_alpha(n);
        let chart = Chart::Upper { n };
        let kind = BracketKind::PlusAlpha {
            alpha: alpha.clone(),
        };
        let h = ik_alpha_field(&alpha, 2).unwrap();
        let xvec = DVector::from_fn(chart.dim(), |i, _| pseudo(6, i));
        let rho = chart.unpack(&xvec).unwrap();
        let grad = chart.unpack(&h.gradient(&xvec)).unwrap();
        let direction = deformed_direction(&alpha, &grad);
        let via_ad = ad_star(Picture::PlusAlpha, &alpha, &direction, &rho)
            .unwrap()
            .scale(-1.0);
        let field = ham_vector_field(&kind, &h, &xvec).unwrap();
        let diff = (&chart.pack(&via_ad).unwrap() - &field).amax();
        assert!(diff < 1e-11, "{diff}");
    }

    #[test]
    fn dual_routes_for_the_dressed_derivative_agree() {
        // For an upper-triangular direction the dressing term contributes
        // nothing to the lower-plus-diagonal part of the commutator, so the
        // dressed and plain infinitesimal actions coincide.
        let n = 5;
        let alpha = test_alpha(n);
        let chart = Chart::LowerDiag { n };
        let h = trace_power_alpha_field(&alpha, 3).unwrap();
        let xvec = DVector::from_fn(chart.dim(), |i, _| pseudo(8, i));
        let rho = chart.unpack(&xvec).unwrap();
        let grad = chart.unpack(&h.gradient(&xvec)).unwrap();
        let direction = minus0_direction(&grad);
        let dressed = ad_star(Picture::Alpha, &alpha, &direction, &rho).unwrap();
        let plain = ad_star(Picture::Minus0, &alpha, &direction, &rho).unwrap();
        assert!((&dressed - &plain).amax() < 1e-13);
    }

    #[test]
    fn rejects_singular_and_misshapen_elements() {
        let n = 4;
        let alpha = test_alpha(n);
        let rho = random_lower_diag(n, 9);
        let mut g = random_upper(n, 10);
        g[(2, 2)] = 0.0;
        assert!(matches!(
            coadjoint_action(Picture::Alpha, &alpha, &g, &rho),
            Err(Error::SingularMatrix(_))
        ));
        let low = Mat::from_fn(n, n, |i, j| if i > j { 1.0 } else { 0.0 }) + Mat::identity(n, n);
        assert!(coadjoint_action(Picture::Minus0, &alpha, &low, &rho).is_err());
        let small = Mat::identity(3, 3);
        assert!(coadjoint_action(Picture::Alpha, &alpha, &small, &rho).is_err());
    }
}
