//! Gauss–Legendre quadrature: plain adaptive integrals and cumulative
//! integral tables with monotone inversion (used by the quadrature-based
//! solution pipelines).

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre polynomial recurrence;
/// accurate to machine precision for the small orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_{n-1}(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // The middle node is exactly zero; recompute its weight cleanly.
        let mid = n / 2;
        nodes[mid] = 0.0;
        let mut p0 = 1.0;
        let mut p1 = 0.0;
        for k in 2..=n {
            let p2 = -((k - 1) as f64) * p0 / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (-p0) / (-1.0);
        weights[mid] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

fn panel_integral(f: &impl Fn(f64) -> f64, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        s += w * f(mid + half * x);
    }
    s * half
}

/// Adaptive Gauss–Legendre integral of `f` over [a, b] to absolute accuracy
/// ~`tol` (estimated by panel bisection agreement).
pub fn adaptive_integral(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(16);
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
        nodes: &[f64],
        weights: &[f64],
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = panel_integral(f, a, m, nodes, weights);
        let right = panel_integral(f, m, b, nodes, weights);
        if depth >= 40 || (left + right - whole).abs() <= tol {
            left + right
        } else {
            recurse(f, a, m, left, 0.5 * tol, depth + 1, nodes, weights)
                + recurse(f, m, b, right, 0.5 * tol, depth + 1, nodes, weights)
        }
    }
    let whole = panel_integral(f, a, b, &nodes, &weights);
    recurse(f, a, b, whole, tol, 0, &nodes, &weights)
}

/// Cumulative integral table for a fixed integrand over [a, b], supporting
/// evaluation of x ↦ ∫ₐˣ f and inversion of that map when f > 0.
#[derive(Debug, Clone)]
pub struct CumulativeQuadrature {
    bounds: Vec<f64>,
    /// cum[k] = integral from a to bounds[k].
    cum: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CumulativeQuadrature {
    /// Build the table, doubling the panel count until the total integral
    /// changes by less than `tol`.
    pub fn build(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Self {
        let (nodes, weights) = gauss_legendre(20);
        let mut m = 8usize;
        let mut prev_total = f64::NAN;
        loop {
            let bounds: Vec<f64> = (0..=m)
                .map(|k| a + (b - a) * k as f64 / m as f64)
                .collect();
            let mut cum = Vec::with_capacity(m + 1);
            cum.push(0.0);
            let mut acc = 0.0;
            for k in 0..m {
                acc += panel_integral(f, bounds[k], bounds[k + 1], &nodes, &weights);
                cum.push(acc);
            }
            if (acc - prev_total).abs() <= tol * (1.0 + acc.abs()) || m >= 4096 {
                return Self {
                    bounds,
                    cum,
                    nodes,
                    weights,
                };
            }
            prev_total = acc;
            m *= 2;
        }
    }

    /// The full integral over [a, b].
    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Cumulative integral from a to `x` (clamped to the table range).
    pub fn eval(&self, f: &impl Fn(f64) -> f64, x: f64) -> f64 {
        let a = self.bounds[0];
        let b = *self.bounds.last().unwrap();
        let x = x.clamp(a.min(b), a.max(b));
        let idx = match self
            .bounds
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
        {
            Ok(k) => return self.cum[k],
            Err(k) => k.saturating_sub(1).min(self.bounds.len() - 2),
        };
        self.cum[idx] + panel_integral(f, self.bounds[idx], x, &self.nodes, &self.weights)
    }

    /// Solve ∫ₐˣ f = `target` for x, assuming f > 0 on the range (monotone
    /// cumulative). Combines a table lookup with Newton polishing.
    pub fn invert(&self, f: &impl Fn(f64) -> f64, target: f64) -> f64 {
        let target = target.clamp(0.0, self.total());
        // Locate the panel by cumulative value.
        let mut idx = match self
            .cum
            .binary_search_by(|p| p.partial_cmp(&target).unwrap())
        {
            Ok(k) => return self.bounds[k],
            Err(k) => k,
        };
        idx = idx.saturating_sub(1).min(self.bounds.len() - 2);
        let mut lo = self.bounds[idx];
        let mut hi = self.bounds[idx + 1];
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let val = self.eval(f, x) - target;
            if val.abs() <= 1e-15 * (1.0 + target.abs()) {
                return x;
            }
            if val > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if (hi - lo).abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
            // Guarded Newton step: accept only strict interior proposals so
            // the bracket shrinks every iteration, else bisect.
            let d = f(x);
            let newton = if d > 0.0 { x - val / d } else { f64::NAN };
            x = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // An n-point rule is exact through degree 2n-1.
        let (nodes, weights) = gauss_legendre(5);
        let integral: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * (x.powi(9) + 3.0 * x.powi(4) - x))
            .sum();
        // ∫₋₁¹ (x⁹ + 3x⁴ − x) dx = 6/5.
        assert!((integral - 1.2).abs() < 1e-14, "got {integral}");
        let total_weight: f64 = weights.iter().sum();
        assert!((total_weight - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_integral_handles_oscillatory_integrand() {
        let f = |x: f64| (10.0 * x).sin() * (-x).exp();
        // ∫₀^π sin(10x)e^{-x} dx = 10/101 · (1 − e^{-π}cos(10π)·…)
        // Reference value computed from the antiderivative
        // −e^{-x}(sin 10x + 10 cos 10x)/101.
        let reference = (10.0 - (-std::f64::consts::PI).exp()
            * ((10.0 * std::f64::consts::PI).sin()
                + 10.0 * (10.0 * std::f64::consts::PI).cos()))
            / 101.0;
        let got = adaptive_integral(&f, 0.0, std::f64::consts::PI, 1e-12);
        assert!((got - reference).abs() < 1e-11, "got {got} want {reference}");
    }

    #[test]
    fn cumulative_table_matches_antiderivative_and_inverts() {
        let f = |x: f64| 1.0 + 0.5 * x.cos();
        let table = CumulativeQuadrature::build(&f, 0.0, 6.0, 1e-13);
        let anti = |x: f64| x + 0.5 * x.sin();
        for i in 0..=30 {
            let x = 6.0 * i as f64 / 30.0;
            let got = table.eval(&f, x);
            assert!(
                (got - anti(x)).abs() < 1e-11,
                "cumulative at {x}: {got} vs {}",
                anti(x)
            );
        }
        for target in [0.3f64, 1.7, 4.4, 6.2] {
            // Targets beyond the total integral are clamped to the endpoint.
            let reachable = target.min(table.total());
            let x = table.invert(&f, target);
            assert!(
                (anti(x) - reachable).abs() < 1e-10,
                "inversion at {target}: x={x}, F(x)={}",
                anti(x)
            );
        }
    }
}
