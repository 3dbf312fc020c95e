use nalgebra::DVector;

/// Default relative step used by the finite-difference gradient fallback.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

type EvalFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
type GradFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

/// A smooth scalar function of packed chart coordinates.
///
/// A field always knows how to evaluate itself; it may additionally carry an
/// analytic gradient, and purely linear fields carry their coefficient vector
/// (which doubles as an exact gradient). Without an analytic gradient,
/// [`ScalarField::gradient`] falls back to central differences with the
/// per-coordinate step `fd_step * (1 + |x_i|)`.
pub struct ScalarField {
    dim: usize,
    eval: Box<EvalFn>,
    grad: Option<Box<GradFn>>,
    linear: Option<DVector<f64>>,
    fd_step: f64,
}

impl ScalarField {
    /// A field from an evaluation closure only; gradients use central
    /// differences.
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Box::new(eval),
            grad: None,
            linear: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// A field with an analytic gradient.
    pub fn with_grad<F, G>(dim: usize, eval: F, grad: G) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Box::new(eval),
            grad: Some(Box::new(grad)),
            linear: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// The homogeneous linear field `x -> coeffs . x`.
    pub fn linear(coeffs: DVector<f64>) -> Self {
        let dim = coeffs.len();
        let c = coeffs.clone();
        Self {
            dim,
            eval: Box::new(move |x| c.dot(x)),
            grad: None,
            linear: Some(coeffs),
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// The coordinate projection `x -> x[idx]`.
    pub fn coordinate(dim: usize, idx: usize) -> Self {
        assert!(idx < dim, "coordinate index out of range");
        let mut c = DVector::zeros(dim);
        c[idx] = 1.0;
        Self::linear(c)
    }

    /// Number of packed coordinates the field expects.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Overrides the relative finite-difference step.
    pub fn set_fd_step(&mut self, step: f64) {
        assert!(step > 0.0, "finite-difference step must be positive");
        self.fd_step = step;
    }

    /// Coefficients of a linear field, when the field is known to be linear.
    pub fn linear_coeffs(&self) -> Option<&DVector<f64>> {
        self.linear.as_ref()
    }

    /// Evaluates the field.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    /// Gradient at `x`: analytic when available, exact for linear fields,
    /// central finite differences otherwise.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        if let Some(c) = &self.linear {
            return c.clone();
        }
        if let Some(g) = &self.grad {
            return g(x);
        }
        let mut out = DVector::zeros(self.dim);
        let mut xs = x.clone();
        for i in 0..self.dim {
            let h = self.fd_step * (1.0 + x[i].abs());
            let xi = x[i];
            xs[i] = xi + h;
            let fp = (self.eval)(&xs);
            xs[i] = xi - h;
            let fm = (self.eval)(&xs);
            xs[i] = xi;
            out[i] = (fp - fm) / (2.0 * h);
        }
        out
    }
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("analytic_grad", &self.grad.is_some())
            .field("linear", &self.linear.is_some())
            .finish()
    }
}
