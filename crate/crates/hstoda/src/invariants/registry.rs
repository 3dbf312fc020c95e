//! Name-addressable access to every invariant family, for configuration
//! files and command-line use. Identifiers look like `I:l=2`, `Ik_alpha:k=2`,
//! `magri:k=2,n=1`, `hkn:k=2,n=3`, `C2_sixdim`, or `h4`.

use super::{
    block_integral_field, hkn_closed_field, ik_alpha_field, magri_field, sixdim_c2_field,
    sixdim_c3_field, trace_power_alpha_field, trace_power_diag_field, trace_power_field,
};
use crate::error::{Error, Result};
use crate::op::{build_alpha, DeformationSequence};
use crate::poisson::{Chart, ScalarField};
use nalgebra::DVector;
use std::fmt;
use std::str::FromStr;

/// An invariant family member, independent of the deformation data it will
/// be evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantId {
    /// `tr(rho^l) / l` on full matrices.
    TracePower { l: usize },
    /// `tr(S^l) / l` on lower-plus-diagonal points dressed by the table.
    TracePowerAlpha { l: usize },
    /// `tr(diag(rho)^l) / l` on lower-plus-diagonal points.
    TracePowerDiag { l: usize },
    /// `tr(M(rho)^k)` for the weighted quadratic kernel on upper points.
    IkAlpha { k: usize },
    /// Closed degree-four Casimir at size 6.
    C2Sixdim,
    /// Closed degree-six Casimir at size 6.
    C3Sixdim,
    /// `nth` pencil-expansion coefficient of `tr(M_eps^k)`.
    Magri { k: usize, nth: usize },
    /// Block integral `h1..h5`.
    Block { which: usize },
    /// Closed combination of block integrals for the one-parameter pencil.
    HknClosed { k: usize, nth: usize },
}

/// Deformation data an invariant is evaluated against. `b` is only needed
/// by the pencil families.
#[derive(Debug, Clone)]
pub struct InvariantContext {
    pub a: DeformationSequence,
    pub b: Option<DeformationSequence>,
}

impl InvariantContext {
    pub fn new(a: DeformationSequence) -> Self {
        Self { a, b: None }
    }

    pub fn with_pencil(a: DeformationSequence, b: DeformationSequence) -> Self {
        Self { a, b: Some(b) }
    }

    pub fn n_size(&self) -> usize {
        self.a.n_size()
    }

    fn second(&self) -> Result<&DeformationSequence> {
        self.b.as_ref().ok_or_else(|| {
            Error::Config("this invariant needs a second sequence (pencil member)".into())
        })
    }
}

impl fmt::Display for InvariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantId::TracePower { l } => write!(f, "I:l={l}"),
            InvariantId::TracePowerAlpha { l } => write!(f, "I_alpha:l={l}"),
            InvariantId::TracePowerDiag { l } => write!(f, "I_minus0:l={l}"),
            InvariantId::IkAlpha { k } => write!(f, "Ik_alpha:k={k}"),
            InvariantId::C2Sixdim => write!(f, "C2_sixdim"),
            InvariantId::C3Sixdim => write!(f, "C3_sixdim"),
            InvariantId::Magri { k, nth } => write!(f, "magri:k={k},n={nth}"),
            InvariantId::Block { which } => write!(f, "h{which}"),
            InvariantId::HknClosed { k, nth } => write!(f, "hkn:k={k},n={nth}"),
        }
    }
}

fn parse_params(s: &str) -> Result<Vec<(String, usize)>> {
    s.split(',')
        .map(|pair| {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed parameter `{pair}`")))?;
            let v: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("parameter `{pair}` is not an integer")))?;
            Ok((key.trim().to_string(), v))
        })
        .collect()
}

fn single(params: &[(String, usize)], key: &str, id: &str) -> Result<usize> {
    match params {
        [(k, v)] if k == key => Ok(*v),
        _ => Err(Error::Config(format!(
            "invariant `{id}` expects exactly one parameter `{key}`"
        ))),
    }
}

fn pair(params: &[(String, usize)], id: &str) -> Result<(usize, usize)> {
    match params {
        [(k1, v1), (k2, v2)] if k1 == "k" && k2 == "n" => Ok((*v1, *v2)),
        _ => Err(Error::Config(format!(
            "invariant `{id}` expects parameters `k=..,n=..`"
        ))),
    }
}

impl FromStr for InvariantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('h') {
            if let Ok(which) = rest.parse::<usize>() {
                if (1..=5).contains(&which) {
                    return Ok(InvariantId::Block { which });
                }
                return Err(Error::Config(format!(
                    "block integral `{s}` out of range (h1..h5)"
                )));
            }
        }
        match s {
            "C2_sixdim" => return Ok(InvariantId::C2Sixdim),
            "C3_sixdim" => return Ok(InvariantId::C3Sixdim),
            _ => {}
        }
        let (name, params) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("unknown invariant `{s}`")))?;
        let params = parse_params(params)?;
        match name {
            "I" => Ok(InvariantId::TracePower {
                l: single(&params, "l", name)?,
            }),
            "I_alpha" => Ok(InvariantId::TracePowerAlpha {
                l: single(&params, "l", name)?,
            }),
            "I_minus0" => Ok(InvariantId::TracePowerDiag {
                l: single(&params, "l", name)?,
            }),
            "Ik_alpha" => Ok(InvariantId::IkAlpha {
                k: single(&params, "k", name)?,
            }),
            "magri" => {
                let (k, nth) = pair(&params, name)?;
                Ok(InvariantId::Magri { k, nth })
            }
            "hkn" => {
                let (k, nth) = pair(&params, name)?;
                Ok(InvariantId::HknClosed { k, nth })
            }
            other => Err(Error::Config(format!("unknown invariant `{other}`"))),
        }
    }
}

/// The chart an invariant's field lives on, at size `n`.
pub fn invariant_chart(id: InvariantId, n: usize) -> Chart {
    match id {
        InvariantId::TracePower { .. } => Chart::Full { n },
        InvariantId::TracePowerAlpha { .. } | InvariantId::TracePowerDiag { .. } => {
            Chart::LowerDiag { n }
        }
        _ => Chart::Upper { n },
    }
}

/// Builds the scalar field for `id` with the deformation data in `ctx`.
pub fn invariant_field(id: InvariantId, ctx: &InvariantContext) -> Result<ScalarField> {
    let n = ctx.n_size();
    match id {
        InvariantId::TracePower { l } => trace_power_field(n, l),
        InvariantId::TracePowerAlpha { l } => trace_power_alpha_field(&build_alpha(&ctx.a), l),
        InvariantId::TracePowerDiag { l } => trace_power_diag_field(n, l),
        InvariantId::IkAlpha { k } => ik_alpha_field(&build_alpha(&ctx.a), k),
        InvariantId::C2Sixdim => sixdim_c2_field(&build_alpha(&ctx.a)),
        InvariantId::C3Sixdim => sixdim_c3_field(&build_alpha(&ctx.a)),
        InvariantId::Magri { k, nth } => magri_field(&ctx.a, ctx.second()?, k, nth),
        InvariantId::Block { which } => block_integral_field(n, which),
        InvariantId::HknClosed { k, nth } => {
            let b = super::magri::one_parameter_pencil(&ctx.a, ctx.second()?)?;
            hkn_closed_field(n, k, nth, b)
        }
    }
}

/// Evaluates `id` at the packed point `x`.
pub fn eval_invariant(id: InvariantId, ctx: &InvariantContext, x: &DVector<f64>) -> Result<f64> {
    let field = invariant_field(id, ctx)?;
    if x.len() != field.dim() {
        return Err(Error::ShapeMismatch(format!(
            "point has dimension {}, invariant {id} expects {}",
            x.len(),
            field.dim()
        )));
    }
    Ok(field.value(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers_round_trip_through_display_and_parse() {
        let ids = [
            InvariantId::TracePower { l: 3 },
            InvariantId::TracePowerAlpha { l: 2 },
            InvariantId::TracePowerDiag { l: 4 },
            InvariantId::IkAlpha { k: 2 },
            InvariantId::C2Sixdim,
            InvariantId::C3Sixdim,
            InvariantId::Magri { k: 2, nth: 1 },
            InvariantId::Block { which: 4 },
            InvariantId::HknClosed { k: 2, nth: 3 },
        ];
        for id in ids {
            let s = id.to_string();
            let back: InvariantId = s.parse().unwrap();
            assert_eq!(back, id, "{s}");
        }
    }

    #[test]
    fn rejects_malformed_identifiers() {
        for bad in ["I", "I:l=x", "h9", "magri:k=2", "nope:z=1", "Ik_alpha:l=2"] {
            assert!(bad.parse::<InvariantId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn evaluates_families_against_their_builders() {
        let a = DeformationSequence::new(vec![0.9, 0.4, -0.3, 0.8, 1.0]).unwrap();
        let ctx = InvariantContext::new(a.clone());
        let id = InvariantId::IkAlpha { k: 2 };
        let chart = invariant_chart(id, ctx.n_size());
        let x = DVector::from_fn(chart.dim(), |i, _| (i as f64 * 0.37).sin() * 0.5);
        let direct = ik_alpha_field(&build_alpha(&a), 2).unwrap().value(&x);
        assert_eq!(eval_invariant(id, &ctx, &x).unwrap(), direct);
        // Pencil families require the second member.
        assert!(matches!(
            eval_invariant(InvariantId::Magri { k: 1, nth: 0 }, &ctx, &x),
            Err(Error::Config(_))
        ));
    }
}
