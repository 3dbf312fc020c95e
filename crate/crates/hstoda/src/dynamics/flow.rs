//! Trajectory integration for every chart — the bracket flows of arbitrary
//! Hamiltonians, the cubic/reduced/rotating-frame pipelines — together with
//! conservation reporting and CSV output.

use std::io::Write;

use nalgebra::{DVector, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rhs::{cubic_rhs, reduced_rhs, rotated_rhs};
use super::state::{ComplexState, ReducedState, RotatedState};
use crate::error::{Error, Result};
use crate::numeric::{integrate_dp45, OdeOptions};
use crate::poisson::{ham_vector_field, BracketKind, ScalarField};

fn default_rtol() -> f64 {
    1e-9
}

fn default_atol() -> f64 {
    1e-12
}

fn default_samples() -> usize {
    201
}

/// Adaptive integration settings shared by every flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Relative local-error tolerance of the embedded 5(4) pair.
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    /// Absolute local-error tolerance.
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Integration window `(t0, t1)`.
    pub t_span: (f64, f64),
    /// Number of equally spaced sample times reported, endpoints included.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: default_rtol(),
            atol: default_atol(),
            t_span: (0.0, 10.0),
            samples: default_samples(),
        }
    }
}

impl IntegratorConfig {
    /// Settings for the window `t_span` with default tolerances.
    pub fn new(t_span: (f64, f64)) -> Self {
        Self {
            t_span,
            ..Self::default()
        }
    }

    /// Same settings with a different sample count.
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    /// The equally spaced sample times, endpoints exact.
    pub fn times(&self) -> Vec<f64> {
        let m = self.samples.max(2);
        let (t0, t1) = self.t_span;
        (0..m)
            .map(|i| {
                if i + 1 == m {
                    t1
                } else {
                    t0 + (t1 - t0) * i as f64 / (m - 1) as f64
                }
            })
            .collect()
    }

    fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            ..OdeOptions::default()
        }
    }
}

/// A sampled solution: times, packed states, and the coordinate names of the
/// chart the states live in.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub coord_names: Vec<String>,
}

impl Trajectory {
    /// The last sampled state.
    pub fn last_state(&self) -> &DVector<f64> {
        self.states.last().expect("a trajectory holds at least one sample")
    }
}

/// Integrates the Hamilton equations of `h` under the chosen bracket,
/// sampling the dense output at `cfg.samples` equally spaced times.
pub fn flow(
    kind: &BracketKind,
    h: &ScalarField,
    point: &DVector<f64>,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let chart = kind.chart();
    if point.len() != chart.dim() || h.dim() != chart.dim() {
        return Err(Error::ShapeMismatch(format!(
            "bracket chart has {} coordinates, point has {}, Hamiltonian expects {}",
            chart.dim(),
            point.len(),
            h.dim()
        )));
    }
    // Surface any structural error once, before entering the integrator.
    ham_vector_field(kind, h, point)?;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let state = DVector::from_column_slice(y);
        let field = ham_vector_field(kind, h, &state)
            .expect("field evaluation cannot fail after the initial shape check");
        dy.copy_from_slice(field.as_slice());
    };
    let solution = integrate_dp45(rhs, cfg.t_span, point.as_slice(), &cfg.ode_options())?;
    let times = cfg.times();
    let states = solution
        .sample(&times)
        .into_iter()
        .map(DVector::from_vec)
        .collect();
    Ok(Trajectory {
        times,
        states,
        coord_names: chart.coord_names(),
    })
}

/// Integrates the cubic complex flow with `c2 = conj(z)^T z` frozen from the
/// initial data; returns the sampled states with their times.
pub fn integrate_cubic(
    state: &ComplexState,
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<ComplexState>)> {
    let m = state.z.len();
    let c2 = state.c2();
    let a = state.a;
    let delta = state.delta.clone();
    let y0: Vec<f64> = state
        .z
        .iter()
        .map(|c| c.re)
        .chain(state.z.iter().map(|c| c.im))
        .collect();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let z = DVector::from_fn(m, |j, _| Complex64::new(y[j], y[m + j]));
        let current = ComplexState {
            z,
            a,
            delta: delta.clone(),
        };
        let dz = cubic_rhs(&current, c2);
        for j in 0..m {
            dy[j] = dz[j].re;
            dy[m + j] = dz[j].im;
        }
    };
    let solution = integrate_dp45(rhs, cfg.t_span, &y0, &cfg.ode_options())?;
    let times = cfg.times();
    let states = solution
        .sample(&times)
        .into_iter()
        .map(|y| ComplexState {
            z: DVector::from_fn(m, |j, _| Complex64::new(y[j], y[m + j])),
            a: state.a,
            delta: state.delta.clone(),
        })
        .collect();
    Ok((times, states))
}

fn pack_reduced(state: &ReducedState) -> Vec<f64> {
    let mut y = Vec::with_capacity(4 * state.xi.len() + 2);
    for v in &state.xi {
        y.extend_from_slice(&[v[0].re, v[0].im, v[1].re, v[1].im]);
    }
    if let Some(x0) = state.xi0 {
        y.extend_from_slice(&[x0.re, x0.im]);
    }
    y
}

fn unpack_reduced(template: &ReducedState, y: &[f64]) -> ReducedState {
    let blocks = template.xi.len();
    let xi = (0..blocks)
        .map(|b| {
            Vector2::new(
                Complex64::new(y[4 * b], y[4 * b + 1]),
                Complex64::new(y[4 * b + 2], y[4 * b + 3]),
            )
        })
        .collect();
    let xi0 = template
        .xi0
        .map(|_| Complex64::new(y[4 * blocks], y[4 * blocks + 1]));
    ReducedState {
        xi,
        xi0,
        lambdas: template.lambdas.clone(),
        o: template.o.clone(),
    }
}

/// Integrates the normal-form flow of the cubic Hamiltonian with the
/// invariant `c2` frozen as a parameter.
pub fn integrate_reduced(
    state: &ReducedState,
    a: f64,
    c2: f64,
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<ReducedState>)> {
    let y0 = pack_reduced(state);
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let current = unpack_reduced(state, y);
        let tangent = reduced_rhs(&current, a, c2);
        for (b, v) in tangent.xi.iter().enumerate() {
            dy[4 * b] = v[0].re;
            dy[4 * b + 1] = v[0].im;
            dy[4 * b + 2] = v[1].re;
            dy[4 * b + 3] = v[1].im;
        }
        if let Some(d0) = tangent.xi0 {
            let base = 4 * tangent.xi.len();
            dy[base] = d0.re;
            dy[base + 1] = d0.im;
        }
    };
    let solution = integrate_dp45(rhs, cfg.t_span, &y0, &cfg.ode_options())?;
    let times = cfg.times();
    let states = solution
        .sample(&times)
        .into_iter()
        .map(|y| unpack_reduced(state, &y))
        .collect();
    Ok((times, states))
}

/// Integrates the rotating-frame system with the invariants `c2`, `rho`,
/// and the frequency denominators `nus` frozen as parameters.
pub fn integrate_rotated(
    state: &RotatedState,
    a: f64,
    c2: f64,
    rho: f64,
    nus: &[f64],
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<RotatedState>)> {
    let m = state.q.len();
    if nus.len() != m || state.p.len() != m || state.r.len() != m {
        return Err(Error::ShapeMismatch(format!(
            "rotating frame carries {m} components, got {} frequency denominators",
            nus.len()
        )));
    }
    let pack = |s: &RotatedState| -> Vec<f64> {
        s.q.iter()
            .chain(s.p.iter())
            .chain(s.r.iter())
            .copied()
            .chain(std::iter::once(s.phi))
            .collect()
    };
    let unpack = |y: &[f64]| -> RotatedState {
        RotatedState {
            q: y[..m].to_vec(),
            p: y[m..2 * m].to_vec(),
            r: y[2 * m..3 * m].to_vec(),
            phi: y[3 * m],
        }
    };
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let tangent = rotated_rhs(&unpack(y), a, c2, rho, nus);
        dy.copy_from_slice(&pack(&tangent));
    };
    let solution = integrate_dp45(rhs, cfg.t_span, &pack(state), &cfg.ode_options())?;
    let times = cfg.times();
    let states = solution.sample(&times).into_iter().map(|y| unpack(&y)).collect();
    Ok((times, states))
}

/// Drift record of one monitored quantity along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct DriftEntry {
    /// Identifier the report is keyed by.
    pub id: String,
    /// Value at the first sample.
    pub initial: f64,
    /// `max_t |F(t) - F(0)| / (1 + |F(0)|)`.
    pub max_drift: f64,
}

/// Relative drifts of a set of named quantities along one trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ConservationReport {
    pub entries: Vec<DriftEntry>,
}

impl ConservationReport {
    /// The worst drift across all monitored quantities.
    pub fn max_drift(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_drift)
            .fold(0.0, f64::max)
    }

    /// Looks an entry up by its identifier.
    pub fn get(&self, id: &str) -> Option<&DriftEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// JSON object keyed by identifier.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for e in &self.entries {
            map.insert(
                e.id.clone(),
                serde_json::json!({ "initial": e.initial, "max_drift": e.max_drift }),
            );
        }
        serde_json::Value::Object(map)
    }
}

/// Evaluates each named scalar along the trajectory and reports its maximum
/// relative drift `max_t |F(t) - F(0)| / (1 + |F(0)|)`.
pub fn conservation_report(
    traj: &Trajectory,
    fields: &[(&str, &ScalarField)],
) -> Result<ConservationReport> {
    let first = traj
        .states
        .first()
        .ok_or_else(|| Error::ShapeMismatch("empty trajectory".into()))?;
    let entries = fields
        .iter()
        .map(|(id, f)| {
            if f.dim() != first.len() {
                return Err(Error::ShapeMismatch(format!(
                    "quantity {id} expects {} coordinates, trajectory has {}",
                    f.dim(),
                    first.len()
                )));
            }
            let initial = f.value(first);
            let max_drift = traj
                .states
                .iter()
                .map(|s| (f.value(s) - initial).abs())
                .fold(0.0, f64::max)
                / (1.0 + initial.abs());
            Ok(DriftEntry {
                id: (*id).to_string(),
                initial,
                max_drift,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConservationReport { entries })
}

/// Writes `t,<coordinate names>` rows with `\n` line endings and `.` as the
/// decimal separator.
pub fn write_trajectory_csv<W: Write>(out: &mut W, traj: &Trajectory) -> Result<()> {
    write!(out, "t")?;
    for name in &traj.coord_names {
        write!(out, ",{name}")?;
    }
    out.write_all(b"\n")?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        if state.len() != traj.coord_names.len() {
            return Err(Error::ShapeMismatch(format!(
                "state carries {} coordinates, header names {}",
                state.len(),
                traj.coord_names.len()
            )));
        }
        write!(out, "{t:?}")?;
        for v in state.iter() {
            write!(out, ",{v:?}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rhs::{angles_rhs, nu_values};
    use crate::dynamics::state::BlockState;
    use crate::invariants::{
        block_integral_field, ik_alpha_field, trace_power_alpha_field, Poly,
    };
    use crate::op::{build_alpha, DeformationSequence, Mat};
    use crate::poisson::{idx_kdiag, Chart};

    fn pseudo(seed: usize, i: usize) -> f64 {
        (((i * 17 + seed * 23 + 3) % 31) as f64) / 31.0 - 0.45
    }

    fn random_block(n: usize, seed: usize) -> BlockState {
        let m = n - 2;
        let mut delta = Mat::zeros(m, m);
        for p in 0..m {
            for q in (p + 1)..m {
                delta[(p, q)] = pseudo(seed, 11 * p + q);
            }
        }
        BlockState::new(
            pseudo(seed, 0),
            DVector::from_fn(m, |j, _| pseudo(seed, j + 1)),
            DVector::from_fn(m, |j, _| pseudo(seed, j + m + 1)),
            delta,
        )
        .unwrap()
    }

    #[test]
    fn zero_hamiltonian_flow_is_exactly_constant() {
        let n = 4;
        let kind = BracketKind::PlusAlpha {
            alpha: build_alpha(&DeformationSequence::ones(n)),
        };
        let dim = kind.chart().dim();
        let h = Poly::zero(dim).into_field();
        let point = DVector::from_fn(dim, |i, _| pseudo(5, i));
        let cfg = IntegratorConfig::new((0.0, 5.0)).with_samples(6);
        let traj = flow(&kind, &h, &point, &cfg).unwrap();
        for state in &traj.states {
            assert_eq!(state, &point);
        }
    }

    #[test]
    fn casimir_flow_leaves_the_state_fixed() {
        let seq = DeformationSequence::new(vec![0.9, 0.7, 0.8, 0.6]).unwrap();
        let alpha = build_alpha(&seq);
        let h = ik_alpha_field(&alpha, 2).unwrap();
        let kind = BracketKind::PlusAlpha { alpha };
        let point = DVector::from_fn(kind.chart().dim(), |i, _| pseudo(2, i));
        let cfg = IntegratorConfig::new((0.0, 10.0)).with_samples(11);
        let traj = flow(&kind, &h, &point, &cfg).unwrap();
        let drift = traj
            .states
            .iter()
            .map(|s| (s - &point).amax())
            .fold(0.0, f64::max);
        assert!(drift < 1e-8, "state drift {drift}");
    }

    #[test]
    fn banded_quadratic_flow_conserves_the_spectral_family() {
        // Tridiagonal Toda-type motion: the quadratic member of the spectral
        // family drives the two bands while every member stays constant.
        let n = 6;
        let kind = BracketKind::KDiagonal { n, k: 2 };
        let dim = kind.chart().dim();
        let mut h = Poly::zero(dim);
        for m in 0..n {
            h.push(0.5, &[idx_kdiag(n, 0, m), idx_kdiag(n, 0, m)]);
        }
        for m in 0..n - 1 {
            h.push(1.0, &[idx_kdiag(n, 1, m), idx_kdiag(n, 1, m)]);
        }
        let h = h.into_field();
        let mut point = DVector::zeros(dim);
        for (m, v) in [0.3, -0.1, 0.2, -0.25, 0.15, 0.05].iter().enumerate() {
            point[idx_kdiag(n, 0, m)] = *v;
        }
        for (m, v) in [0.4, 0.3, 0.5, 0.35, 0.45].iter().enumerate() {
            point[idx_kdiag(n, 1, m)] = *v;
        }
        let cfg = IntegratorConfig::new((0.0, 5.0)).with_samples(11);
        let traj = flow(&kind, &h, &point, &cfg).unwrap();

        let alpha = build_alpha(&DeformationSequence::ones(n));
        let lower = Chart::LowerDiag { n };
        let band_chart = kind.chart();
        for l in 2..=4 {
            let field = trace_power_alpha_field(&alpha, l).unwrap();
            let values: Vec<f64> = traj
                .states
                .iter()
                .map(|s| {
                    let matrix = band_chart.unpack(s).unwrap();
                    field.value(&lower.pack(&matrix).unwrap())
                })
                .collect();
            let drift = values
                .iter()
                .map(|v| (v - values[0]).abs())
                .fold(0.0, f64::max);
            assert!(drift < 1e-7, "spectral power {l} drifts by {drift}");
        }
    }

    #[test]
    fn cubic_flow_conserves_the_block_integrals() {
        let n = 6;
        let state = random_block(n, 3).to_complex();
        let cfg = IntegratorConfig::new((0.0, 3.0)).with_samples(7);
        let (_, samples) = integrate_cubic(&state, &cfg).unwrap();

        for which in 1..=5 {
            let field = block_integral_field(n, which).unwrap();
            let values: Vec<f64> = samples
                .iter()
                .map(|s| field.value(&s.to_block().pack()))
                .collect();
            let drift = values
                .iter()
                .map(|v| (v - values[0]).abs())
                .fold(0.0, f64::max)
                / (1.0 + values[0].abs());
            assert!(drift < 1e-7, "integral h{which} drifts by {drift}");
        }

        // The skew-quadratic combination conj(z)^T K^2 z + i a conj(z)^T K z
        // is real, constant, and equals a^2 h2 - h5 / 4 pointwise.
        let h2 = block_integral_field(n, 2).unwrap();
        let h5 = block_integral_field(n, 5).unwrap();
        let skew_quad = |s: &ComplexState| -> Complex64 {
            let k = s.skew();
            let m = s.z.len();
            let kz = DVector::from_fn(m, |r, _| {
                (0..m).map(|c| s.z[c] * k[(r, c)]).sum::<Complex64>()
            });
            let kkz = DVector::from_fn(m, |r, _| {
                (0..m).map(|c| kz[c] * k[(r, c)]).sum::<Complex64>()
            });
            let zbar = s.z.map(|c| c.conj());
            zbar.dot(&kkz) + Complex64::i() * s.a * zbar.dot(&kz)
        };
        let w0 = skew_quad(&samples[0]);
        for s in &samples {
            let w = skew_quad(s);
            assert!((w - w0).norm() < 1e-7, "skew combination drifts");
            let packed = s.to_block().pack();
            let identity = s.a * s.a * h2.value(&packed) - 0.25 * h5.value(&packed);
            assert!((w.re - identity).abs() < 1e-10);
            assert!(w.im.abs() < 1e-10);
        }
    }

    #[test]
    fn reduced_flow_keeps_the_per_block_invariants() {
        // Odd interior size: two 2x2 blocks plus the scalar component.
        let n = 7;
        let cs = random_block(n, 8).to_complex();
        let red = ReducedState::from_complex(&cs).unwrap();
        let a = cs.a;
        let c2 = cs.c2();
        let c0: Vec<f64> = red.block_invariants(a);
        let cfg = IntegratorConfig::new((0.0, 2.0)).with_samples(9);
        let (_, samples) = integrate_reduced(&red, a, c2, &cfg).unwrap();

        for s in &samples {
            for (b, v) in s.xi.iter().enumerate() {
                let lam = s.lambdas[b];
                let nu = a * a - lam * lam;
                let eta = v[0] * v[0] + v[1] * v[1];
                let t = v[0].norm_sqr() + v[1].norm_sqr();
                let c = s.block_invariants(a)[b];
                assert!((c - c0[b]).abs() < 1e-7, "block {b} invariant drifts");
                // The second conserved combination is functionally dependent:
                // a^2/2 |eta|^2 - nu/2 t^2 - lam c t == -c^2/2.
                let d = 0.5 * a * a * eta.norm_sqr() - 0.5 * nu * t * t - lam * c0[b] * t;
                assert!((d + 0.5 * c0[b] * c0[b]).abs() < 1e-8, "block {b} dependence");
            }
        }

        // The scalar component carries no analogous invariant: its radius
        // a |xi0|^2 genuinely moves (its frequency denominator a^2 is not 0).
        let r0: Vec<f64> = samples
            .iter()
            .map(|s| a * s.xi0.unwrap().norm_sqr())
            .collect();
        let swing = r0
            .iter()
            .map(|v| (v - r0[0]).abs())
            .fold(0.0, f64::max);
        assert!(swing > 1e-4, "expected the scalar radius to move, swing {swing}");
    }

    #[test]
    fn rotated_flow_preserves_its_linear_and_radius_invariants() {
        let n = 6;
        let cs = random_block(n, 12).to_complex();
        let red = ReducedState::from_complex(&cs).unwrap();
        let a = cs.a;
        let c2 = cs.c2();
        let cks = red.block_invariants(a);
        let rot = RotatedState::from_reduced(&red, a);
        let rho = rot.rho();
        let nus = nu_values(&red, a);
        let cfg = IntegratorConfig::new((0.0, 2.0)).with_samples(9);
        let (_, samples) = integrate_rotated(&rot, a, c2, rho, &nus, &cfg).unwrap();

        let f0: f64 = rot.r.iter().zip(&nus).map(|(r, nu)| r / nu).sum();
        let g0: f64 = rho
            * rot
                .q
                .iter()
                .zip(&nus)
                .map(|(q, nu)| nu * q)
                .sum::<f64>()
            - 0.5 * rot.r.iter().sum::<f64>().powi(2);
        for s in &samples {
            let sum_p: f64 = s.p.iter().sum();
            let sum_q: f64 = s.q.iter().sum();
            assert!(sum_p.abs() < 1e-9, "sum p = {sum_p}");
            assert!((sum_q - rho).abs() < 1e-9, "sum q - rho = {}", sum_q - rho);
            let f: f64 = s.r.iter().zip(&nus).map(|(r, nu)| r / nu).sum();
            assert!((f - f0).abs() < 1e-8, "f drifts by {}", f - f0);
            let g: f64 = rho
                * s.q.iter().zip(&nus).map(|(q, nu)| nu * q).sum::<f64>()
                - 0.5 * s.r.iter().sum::<f64>().powi(2);
            assert!((g - g0).abs() < 1e-8, "g drifts by {}", g - g0);
            for ((&r, &nu), (qp, ck)) in s
                .r
                .iter()
                .zip(&nus)
                .zip(s.q.iter().zip(&s.p).map(|(&q, &p)| q * q + p * p).zip(&cks))
            {
                let radius = r * r - nu * qp;
                assert!((radius - ck * ck).abs() < 1e-9, "radius constraint drifts");
            }
        }
    }

    #[test]
    fn rotating_frame_reconstruction_matches_the_reduced_flow() {
        let n = 6;
        let cs = random_block(n, 21).to_complex();
        let red = ReducedState::from_complex(&cs).unwrap();
        let a = cs.a;
        let c2 = cs.c2();
        let rot = RotatedState::from_reduced(&red, a);
        let rho = rot.rho();
        let nus = nu_values(&red, a);
        let cfg = IntegratorConfig::new((0.0, 2.0)).with_samples(9);
        let (_, direct) = integrate_reduced(&red, a, c2, &cfg).unwrap();
        let (_, frame) = integrate_rotated(&rot, a, c2, rho, &nus, &cfg).unwrap();

        for (s_red, s_rot) in direct.iter().zip(&frame) {
            let etas = s_rot.etas();
            for (b, v) in s_red.xi.iter().enumerate() {
                let eta = v[0] * v[0] + v[1] * v[1];
                assert!(
                    (eta - etas[b]).norm() < 1e-6,
                    "component {b}: {:e}",
                    (eta - etas[b]).norm()
                );
            }
        }
    }

    #[test]
    fn angle_rates_integrate_to_the_reduced_trajectory() {
        let n = 6;
        let cs = random_block(n, 4).to_complex();
        let red = ReducedState::from_complex(&cs).unwrap();
        let a = cs.a;
        let c2 = cs.c2();
        let cks = red.block_invariants(a);
        let lambdas = red.lambdas.clone();
        let blocks = red.xi.len();
        let rot = RotatedState::from_reduced(&red, a);
        let rho = rot.rho();
        let nus = nu_values(&red, a);

        // Joint system: the rotating-frame coordinates plus both polar
        // angles of every block; the 2-vectors are reconstructed from the
        // amplitude data on every evaluation.
        let reconstruct = |y: &[f64]| -> (RotatedState, Vec<Vector2<Complex64>>) {
            let rot = RotatedState {
                q: y[..blocks].to_vec(),
                p: y[blocks..2 * blocks].to_vec(),
                r: y[2 * blocks..3 * blocks].to_vec(),
                phi: y[3 * blocks],
            };
            let etas = rot.etas();
            let xi = (0..blocks)
                .map(|b| {
                    let t = (a * rot.r[b] - lambdas[b] * cks[b]) / nus[b];
                    let big_a = 0.5 * (t + etas[b].re);
                    let big_b = 0.5 * (t - etas[b].re);
                    let alpha = y[3 * blocks + 1 + b];
                    let beta = y[4 * blocks + 1 + b];
                    Vector2::new(
                        Complex64::new(
                            big_a.max(0.0).sqrt() * alpha.cos(),
                            big_b.max(0.0).sqrt() * beta.cos(),
                        ),
                        Complex64::new(
                            big_a.max(0.0).sqrt() * alpha.sin(),
                            big_b.max(0.0).sqrt() * beta.sin(),
                        ),
                    )
                })
                .collect();
            (rot, xi)
        };
        let mut y0: Vec<f64> = rot
            .q
            .iter()
            .chain(rot.p.iter())
            .chain(rot.r.iter())
            .copied()
            .chain(std::iter::once(rot.phi))
            .collect();
        for v in &red.xi {
            y0.push(v[1].re.atan2(v[0].re));
        }
        for v in &red.xi {
            y0.push(v[1].im.atan2(v[0].im));
        }
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let (rot, xi) = reconstruct(y);
            let tangent = rotated_rhs(&rot, a, c2, rho, &nus);
            let sigma: Complex64 = rot.etas().iter().sum();
            let (dalpha, dbeta) = angles_rhs(&xi, &lambdas, sigma, a, c2, t)
                .expect("trajectory stays clear of degenerate amplitudes");
            for b in 0..blocks {
                dy[b] = tangent.q[b];
                dy[blocks + b] = tangent.p[b];
                dy[2 * blocks + b] = tangent.r[b];
                dy[3 * blocks + 1 + b] = dalpha[b];
                dy[4 * blocks + 1 + b] = dbeta[b];
            }
            dy[3 * blocks] = tangent.phi;
        };
        let cfg = IntegratorConfig::new((0.0, 2.0)).with_samples(9);
        let solution = integrate_dp45(rhs, cfg.t_span, &y0, &cfg.ode_options()).unwrap();
        let times = cfg.times();
        let joint = solution.sample(&times);
        let (_, direct) = integrate_reduced(&red, a, c2, &cfg).unwrap();

        for (y, s_red) in joint.iter().zip(&direct) {
            let (_, xi) = reconstruct(y);
            for b in 0..blocks {
                let err = (xi[b][0] - s_red.xi[b][0]).norm().max((xi[b][1] - s_red.xi[b][1]).norm());
                assert!(err < 1e-6, "block {b}: {err:e}");
            }
        }
    }

    #[test]
    fn conservation_report_measures_relative_drift() {
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![
                DVector::from_vec(vec![1.0, 2.0]),
                DVector::from_vec(vec![1.0, 5.0]),
            ],
            coord_names: vec!["u".into(), "w".into()],
        };
        let fixed = ScalarField::coordinate(2, 0);
        let moving = ScalarField::coordinate(2, 1);
        let report =
            conservation_report(&traj, &[("fixed", &fixed), ("moving", &moving)]).unwrap();
        assert_eq!(report.get("fixed").unwrap().max_drift, 0.0);
        assert!((report.get("moving").unwrap().max_drift - 1.0).abs() < 1e-15);
        assert!((report.max_drift() - 1.0).abs() < 1e-15);
        let json = report.to_json();
        assert!((json["moving"]["initial"].as_f64().unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn csv_output_has_the_expected_shape() {
        let traj = Trajectory {
            times: vec![0.0, 0.5],
            states: vec![
                DVector::from_vec(vec![1.0, -2.25]),
                DVector::from_vec(vec![0.125, 3.5]),
            ],
            coord_names: vec!["rho_0_1".into(), "rho_0_2".into()],
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,rho_0_1,rho_0_2\n"));
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.trim_end().split('\n').collect();
        assert_eq!(lines.len(), 3);
        let second: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(second, vec![0.5, 0.125, 3.5]);
    }
}
