//! Adaptive Dormand–Prince 5(4) integration with dense output, plus a
//! fixed-step classical Runge–Kutta scheme for reproducibility checks.

use crate::error::{Error, Result};

/// Butcher tableau stage coefficients of the Dormand–Prince 5(4) pair.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
/// Fifth-order solution weights (also the seventh stage row: first-same-as-last).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
/// Difference between the fifth- and embedded fourth-order weights.
const E1: f64 = 71.0 / 57_600.0;
const E3: f64 = -71.0 / 16_695.0;
const E4: f64 = 71.0 / 1_920.0;
const E5: f64 = -17_253.0 / 339_200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
/// Dense-output weights for the quartic continuous extension.
const D1: f64 = -12_715_105_075.0 / 11_282_082_432.0;
const D3: f64 = 87_487_479_700.0 / 32_700_410_799.0;
const D4: f64 = -10_690_763_975.0 / 1_880_347_072.0;
const D5: f64 = 701_980_252_875.0 / 199_316_789_632.0;
const D6: f64 = -1_453_857_185.0 / 822_651_844.0;
const D7: f64 = 69_997_945.0 / 29_380_423.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Options controlling the adaptive integrator.
#[derive(Debug, Clone)]
pub struct OdeOptions {
    /// Relative tolerance on the embedded local error estimate.
    pub rtol: f64,
    /// Absolute tolerance on the embedded local error estimate.
    pub atol: f64,
    /// Initial step; selected automatically when absent.
    pub h0: Option<f64>,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h0: None,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted step together with its continuous-extension coefficients.
#[derive(Debug, Clone)]
struct DenseStep {
    t0: f64,
    h: f64,
    /// Quartic interpolant coefficients per component:
    /// y(t0 + θh) = r0 + θ(r1 + (1−θ)(r2 + θ(r3 + (1−θ)r4))).
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t0) / self.h;
        let omt = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + omt * (self.rcont[2][i] + theta * (self.rcont[3][i] + omt * self.rcont[4][i])));
        }
    }
}

/// Result of an adaptive integration: dense output over the whole span.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    steps: Vec<DenseStep>,
    t0: f64,
    t_end: f64,
    y_end: Vec<f64>,
    /// Number of accepted steps (diagnostics).
    pub n_accepted: usize,
    /// Number of rejected trial steps (diagnostics).
    pub n_rejected: usize,
}

impl OdeSolution {
    /// Final time reached (the requested span end).
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// State at the end of the span.
    pub fn y_end(&self) -> &[f64] {
        &self.y_end
    }

    /// Evaluate the dense output at `t`, which must lie inside the span.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.y_end.len()];
        self.eval_into(t, &mut out);
        out
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        debug_assert!(!self.steps.is_empty());
        let forward = self.t_end >= self.t0;
        // Binary search for the step whose interval contains t.
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let step_end = self.steps[mid].t0 + self.steps[mid].h;
            let before = if forward { t > step_end } else { t < step_end };
            if before {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        self.steps[lo].eval_into(t, out);
    }

    /// Sample the dense output at the given times.
    pub fn sample(&self, times: &[f64]) -> Vec<Vec<f64>> {
        times.iter().map(|&t| self.eval(t)).collect()
    }
}

/// Integrate `dy/dt = f(t, y)` over `t_span` with the Dormand–Prince 5(4)
/// embedded pair, proportional step control, and dense output.
///
/// `f(t, &y, &mut dy)` writes the derivative into `dy`.
pub fn integrate_dp45<F>(
    mut f: F,
    t_span: (f64, f64),
    y0: &[f64],
    opts: &OdeOptions,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let (t0, t_end) = t_span;
    let dim = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k1 = vec![0.0; dim];
    f(t, &y, &mut k1);

    if span == 0.0 {
        return Ok(OdeSolution {
            steps: vec![DenseStep {
                t0,
                h: 1.0,
                rcont: [y.clone(), vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]],
            }],
            t0,
            t_end,
            y_end: y,
            n_accepted: 0,
            n_rejected: 0,
        });
    }

    let scale = |yi: f64, yn: f64| opts.atol + opts.rtol * yi.abs().max(yn.abs());

    // Initial step size: either user-provided or a derivative-based guess.
    let mut h = match opts.h0 {
        Some(h0) => h0.abs().min(span) * dir,
        None => {
            let d0 = rms(&y, |i, v| v / scale(y[i], y[i]));
            let d1 = rms(&k1, |i, v| v / scale(y[i], y[i]));
            let h_guess = if d0 < 1e-10 || d1 < 1e-10 {
                1e-6
            } else {
                0.01 * d0 / d1
            };
            h_guess.min(span) * dir
        }
    };

    let mut steps: Vec<DenseStep> = Vec::new();
    let mut n_accepted = 0usize;
    let mut n_rejected = 0usize;

    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut ytmp = vec![0.0; dim];
    let mut y1 = vec![0.0; dim];

    for _ in 0..opts.max_steps {
        if (t - t_end) * dir >= 0.0 {
            return Ok(OdeSolution {
                steps,
                t0,
                t_end,
                y_end: y,
                n_accepted,
                n_rejected,
            });
        }
        // Clamp the final step to land exactly on t_end.
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::IntegrationFailure {
                t,
                reason: "step size underflow".into(),
            });
        }

        for i in 0..dim {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &ytmp, &mut k2);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &ytmp, &mut k3);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &ytmp, &mut k4);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &ytmp, &mut k5);
        for i in 0..dim {
            ytmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &ytmp, &mut k6);
        for i in 0..dim {
            y1[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + h, &y1, &mut k7);

        // Embedded error estimate in the mixed absolute/relative norm.
        let mut err_sq = 0.0;
        for i in 0..dim {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = scale(y[i], y1[i]);
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / dim as f64).sqrt();

        if err <= 1.0 {
            // Accept: record the continuous extension, then advance (FSAL).
            let mut r0 = vec![0.0; dim];
            let mut r1 = vec![0.0; dim];
            let mut r2 = vec![0.0; dim];
            let mut r3 = vec![0.0; dim];
            let mut r4 = vec![0.0; dim];
            for i in 0..dim {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                r0[i] = y[i];
                r1[i] = ydiff;
                r2[i] = bspl;
                r3[i] = ydiff - h * k7[i] - bspl;
                r4[i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            steps.push(DenseStep {
                t0: t,
                h,
                rcont: [r0, r1, r2, r3, r4],
            });
            t += h;
            y.copy_from_slice(&y1);
            k1.copy_from_slice(&k7);
            n_accepted += 1;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            n_rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }

    Err(Error::IntegrationFailure {
        t,
        reason: format!("step budget of {} exhausted", opts.max_steps),
    })
}

fn rms(v: &[f64], map: impl Fn(usize, f64) -> f64) -> f64 {
    let s: f64 = v.iter().enumerate().map(|(i, &x)| map(i, x).powi(2)).sum();
    (s / v.len() as f64).sqrt()
}

/// Classical fourth-order Runge–Kutta with a fixed number of steps.
///
/// Returns the state at every node, including the initial one. Deterministic
/// by construction: the node placement does not depend on the solution.
pub fn integrate_rk4_fixed<F>(
    mut f: F,
    t_span: (f64, f64),
    y0: &[f64],
    n_steps: usize,
) -> Vec<(f64, Vec<f64>)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let (t0, t_end) = t_span;
    let dim = y0.len();
    let h = (t_end - t0) / n_steps.max(1) as f64;
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut y = y0.to_vec();
    out.push((t0, y.clone()));
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut ytmp = vec![0.0; dim];
    for step in 0..n_steps {
        let t = t0 + step as f64 * h;
        f(t, &y, &mut k1);
        for i in 0..dim {
            ytmp[i] = y[i] + 0.5 * h * k1[i];
        }
        f(t + 0.5 * h, &ytmp, &mut k2);
        for i in 0..dim {
            ytmp[i] = y[i] + 0.5 * h * k2[i];
        }
        f(t + 0.5 * h, &ytmp, &mut k3);
        for i in 0..dim {
            ytmp[i] = y[i] + h * k3[i];
        }
        f(t + h, &ytmp, &mut k4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push((t + h, y.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_analytic_solution() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let sol = integrate_dp45(f, (0.0, 5.0), &[1.0], &OdeOptions::default()).unwrap();
        let got = sol.y_end()[0];
        let want = (-5.0f64).exp();
        assert!(
            (got - want).abs() < 1e-10,
            "exp decay end state {got} vs {want}"
        );
    }

    #[test]
    fn harmonic_oscillator_dense_output_accuracy() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let sol = integrate_dp45(f, (0.0, 10.0), &[1.0, 0.0], &OdeOptions::default()).unwrap();
        // Check the continuous extension at many off-node times.
        for i in 0..200 {
            let t = 10.0 * (i as f64 + 0.5) / 200.0;
            let y = sol.eval(t);
            assert!(
                (y[0] - t.cos()).abs() < 1e-8 && (y[1] + t.sin()).abs() < 1e-8,
                "dense output at t={t}: ({}, {}) vs ({}, {})",
                y[0],
                y[1],
                t.cos(),
                -t.sin()
            );
        }
    }

    #[test]
    fn dense_output_agrees_with_restarted_integration() {
        // A mildly stiff nonlinear system; the dense output must agree with
        // integrating directly to the sample point.
        let f = |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0] - 0.3 * y[1] + (2.0 * t).sin();
        };
        let opts = OdeOptions::default();
        let sol = integrate_dp45(f, (0.0, 4.0), &[0.4, -0.2], &opts).unwrap();
        for &t in &[0.37, 1.234, 2.95, 3.9999] {
            let direct = integrate_dp45(f, (0.0, t), &[0.4, -0.2], &opts).unwrap();
            let dense = sol.eval(t);
            for i in 0..2 {
                assert!(
                    (dense[i] - direct.y_end()[i]).abs() < 1e-9,
                    "dense vs restart at t={t}, comp {i}: {} vs {}",
                    dense[i],
                    direct.y_end()[i]
                );
            }
        }
    }

    #[test]
    fn rk4_fixed_converges_at_fourth_order() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let coarse = integrate_rk4_fixed(f, (0.0, 1.0), &[1.0], 50);
        let fine = integrate_rk4_fixed(f, (0.0, 1.0), &[1.0], 100);
        let e = std::f64::consts::E;
        let err_coarse = (coarse.last().unwrap().1[0] - e).abs();
        let err_fine = (fine.last().unwrap().1[0] - e).abs();
        let order = (err_coarse / err_fine).log2();
        assert!(
            (order - 4.0).abs() < 0.2,
            "observed order {order}, errors {err_coarse} {err_fine}"
        );
    }

    #[test]
    fn backward_integration_is_supported() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let sol = integrate_dp45(f, (2.0, 0.0), &[(-2.0f64).exp()], &OdeOptions::default()).unwrap();
        // Global error scales with rtol (1e-9 default) on this growing solution.
        assert!((sol.y_end()[0] - 1.0).abs() < 1e-8);
        let mid = sol.eval(1.0);
        assert!((mid[0] - (-1.0f64).exp()).abs() < 1e-8);
    }
}
