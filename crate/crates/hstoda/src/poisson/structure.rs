use nalgebra::DVector;

use super::bracket::{bracket, BracketKind};
use super::field::ScalarField;
use crate::error::Result;

/// Structure constants of a linear bracket: `{x_u, x_v} = sum_w c^w_{uv} x_w`.
///
/// Built once by evaluating the bracket of coordinate pairs at unit points
/// (exact for linear brackets, since coordinate fields carry exact
/// gradients), then reused for closure checks and Jacobi residuals.
#[derive(Debug)]
pub struct StructureTensor {
    dim: usize,
    /// `c[u * dim + v]` lists the nonzero `(w, coeff)` pairs of `{x_u, x_v}`.
    c: Vec<Vec<(usize, f64)>>,
}

impl StructureTensor {
    pub fn new(kind: &BracketKind) -> Result<Self> {
        let dim = kind.chart().dim();
        let coords: Vec<ScalarField> = (0..dim).map(|u| ScalarField::coordinate(dim, u)).collect();
        let mut c = vec![Vec::new(); dim * dim];
        let mut unit = DVector::zeros(dim);
        for w in 0..dim {
            unit[w] = 1.0;
            for u in 0..dim {
                for v in (u + 1)..dim {
                    let val = bracket(kind, &coords[u], &coords[v], &unit)?;
                    if val != 0.0 {
                        c[u * dim + v].push((w, val));
                        c[v * dim + u].push((w, -val));
                    }
                }
            }
            unit[w] = 0.0;
        }
        Ok(Self { dim, c })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sparse expansion of `{x_u, x_v}`.
    pub fn coeffs(&self, u: usize, v: usize) -> &[(usize, f64)] {
        &self.c[u * self.dim + v]
    }

    /// Value of `{x_u, x_v}` at a packed point.
    pub fn value(&self, u: usize, v: usize, x: &DVector<f64>) -> f64 {
        self.coeffs(u, v).iter().map(|&(w, co)| co * x[w]).sum()
    }

    /// Cyclic Jacobi sum `{{x_u,x_v},x_w} + {{x_v,x_w},x_u} + {{x_w,x_u},x_v}`
    /// at `x`, expanded through the structure constants.
    pub fn jacobi_residual(&self, u: usize, v: usize, w: usize, x: &DVector<f64>) -> f64 {
        let mut total = 0.0;
        for &(a, b, c) in &[(u, v, w), (v, w, u), (w, u, v)] {
            for &(s, co) in self.coeffs(a, b) {
                total += co * self.value(s, c, x);
            }
        }
        total
    }

    /// Maximum absolute Jacobi residual over all coordinate triples at `x`.
    pub fn jacobi_max(&self, x: &DVector<f64>) -> f64 {
        let mut max = 0.0_f64;
        for u in 0..self.dim {
            for v in (u + 1)..self.dim {
                for w in (v + 1)..self.dim {
                    max = max.max(self.jacobi_residual(u, v, w, x).abs());
                }
            }
        }
        max
    }
}

/// Jacobi residual `{{f,g},h} + {{g,h},f} + {{h,f},g}` at `x` for general
/// smooth fields.
///
/// When all three fields are linear the inner brackets are themselves linear
/// and are expanded exactly through unit-point evaluations; otherwise the
/// inner bracket's gradient is taken by central differences.
pub fn jacobi_residual(
    kind: &BracketKind,
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
    x: &DVector<f64>,
) -> Result<f64> {
    let chart = kind.chart();
    let dim = chart.dim();
    let all_linear =
        f.linear_coeffs().is_some() && g.linear_coeffs().is_some() && h.linear_coeffs().is_some();
    let mut total = 0.0;
    for (a, b, c) in [(f, g, h), (g, h, f), (h, f, g)] {
        // Gradient of the inner bracket F = {a, b} at x.
        let g_inner = if all_linear {
            // F is linear, so its gradient is its coefficient vector.
            let mut coeffs = DVector::zeros(dim);
            let mut unit = DVector::zeros(dim);
            for w in 0..dim {
                unit[w] = 1.0;
                coeffs[w] = bracket(kind, a, b, &unit)?;
                unit[w] = 0.0;
            }
            coeffs
        } else {
            let mut grad = DVector::zeros(dim);
            let mut xs = x.clone();
            for i in 0..dim {
                let step = 1e-5 * (1.0 + x[i].abs());
                let xi = x[i];
                xs[i] = xi + step;
                let fp = bracket(kind, a, b, &xs)?;
                xs[i] = xi - step;
                let fm = bracket(kind, a, b, &xs)?;
                xs[i] = xi;
                grad[i] = (fp - fm) / (2.0 * step);
            }
            grad
        };
        let g_c = c.gradient(x);
        total += super::bracket::bracket_from_gradients(kind, &chart, &g_inner, &g_c, x)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::{build_alpha, DeformationSequence};

    #[test]
    fn jacobi_vanishes_for_deformed_bracket() {
        let alpha = build_alpha(
            &DeformationSequence::new(vec![0.9, -0.3, 0.0, 0.62]).unwrap(),
        );
        let kind = BracketKind::PlusAlpha { alpha };
        let tensor = StructureTensor::new(&kind).unwrap();
        let x = DVector::from_fn(tensor.dim(), |i, _| ((i * 5 % 7) as f64) / 7.0 - 0.4);
        assert!(tensor.jacobi_max(&x) < 1e-12);
    }

    #[test]
    fn jacobi_vanishes_for_every_bracket_family() {
        let n = 4;
        let alpha = build_alpha(&DeformationSequence::new(vec![0.7, -0.5, 0.3, 0.9]).unwrap());
        let a = DeformationSequence::ones(n);
        let b = DeformationSequence::new(vec![1.0, 0.35, 1.0, 1.0]).unwrap();
        let kinds: Vec<BracketKind> = vec![
            BracketKind::Canonical { n },
            BracketKind::Minus0 { n },
            BracketKind::Eta {
                eta: crate::op::DiagonalVector::new(alpha.eta().to_vec()),
            },
            BracketKind::KDiagonal { n, k: 3 },
            BracketKind::pencil(&a, &b, 0.8).unwrap(),
        ];
        for kind in &kinds {
            let tensor = StructureTensor::new(kind).unwrap();
            let x = DVector::from_fn(tensor.dim(), |i, _| 0.15 * (i as f64) - 0.5);
            let max = tensor.jacobi_max(&x);
            assert!(max < 1e-12, "jacobi residual {max} for {kind:?}");
        }
    }

    #[test]
    fn tensor_matches_direct_bracket_on_linear_fields() {
        let alpha = build_alpha(&DeformationSequence::new(vec![0.5, 0.25, -1.0]).unwrap());
        let kind = BracketKind::PlusAlpha { alpha };
        let tensor = StructureTensor::new(&kind).unwrap();
        let dim = tensor.dim();
        let x = DVector::from_column_slice(&[0.3, -0.7, 0.2]);
        for u in 0..dim {
            for v in 0..dim {
                let f = ScalarField::coordinate(dim, u);
                let g = ScalarField::coordinate(dim, v);
                let direct = bracket(&kind, &f, &g, &x).unwrap();
                assert!((tensor.value(u, v, &x) - direct).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn jacobi_residual_linear_path_matches_tensor() {
        let alpha = build_alpha(&DeformationSequence::new(vec![0.8, 0.1, 0.7, -0.2]).unwrap());
        let kind = BracketKind::PlusAlpha { alpha };
        let tensor = StructureTensor::new(&kind).unwrap();
        let dim = tensor.dim();
        let x = DVector::from_fn(dim, |i, _| 0.1 + 0.05 * i as f64);
        let f = ScalarField::coordinate(dim, 0);
        let g = ScalarField::coordinate(dim, 2);
        let h = ScalarField::coordinate(dim, 4);
        let direct = jacobi_residual(&kind, &f, &g, &h, &x).unwrap();
        let via_tensor = tensor.jacobi_residual(0, 2, 4, &x);
        assert!((direct - via_tensor).abs() < 1e-13);
    }
}
