//! Full-order system representations, desk-scale benchmark generators, and
//! the reference simulators used as ground truth everywhere else.

pub mod benchmarks;
mod descriptor;
mod generators;
pub(crate) mod simulate;

pub use descriptor::{
    Constraints, ControlObjective, Dimensions, InputBounds, Linearity, LinearityKind,
    NonlinearityDetails, ObjectiveKind, Physics, SamplingRequirements, StateBound,
    SystemDescriptor, SystemType, TimeConstants,
};
pub use generators::{make_heat_chain, make_spring_mass_chain, HeatChainConfig, SpringChainConfig};
pub use simulate::{linearize, simulate_lti, simulate_nonlinear, Trajectory};

use crate::numerics::ensure_finite;
use crate::{Error, Mat, Result, Vector};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

/// Optional state/input/output names.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct Labels {
    pub states: Option<Vec<String>>,
    pub inputs: Option<Vec<String>>,
    pub outputs: Option<Vec<String>>,
}

/// Linear time-invariant system `dx/dt = A x + B u`, `y = C x`.
#[derive(Debug, Clone)]
pub struct LtiSystem {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub labels: Labels,
}

impl LtiSystem {
    pub fn new(a: Mat, b: Mat, c: Mat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || n == 0 {
            return Err(Error::dim("A must be square and non-empty"));
        }
        if b.nrows() != n {
            return Err(Error::dim(format!("B has {} rows, expected {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::dim(format!("C has {} cols, expected {n}", c.ncols())));
        }
        ensure_finite(&a, "A")?;
        ensure_finite(&b, "B")?;
        ensure_finite(&c, "C")?;
        Ok(LtiSystem { a, b, c, labels: Labels::default() })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }
}

/// Vector field `f(x, u)` of a nonlinear plant. `eval_component` exists so
/// interpolation-based reduction can sample single components at O(stencil)
/// cost.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn inputs(&self) -> usize;
    fn eval(&self, x: &Vector, u: &Vector, out: &mut Vector);
    fn eval_component(&self, x: &Vector, u: &Vector, i: usize) -> f64 {
        let mut out = Vector::zeros(self.dim());
        self.eval(x, u, &mut out);
        out[i]
    }
}

/// Nonlinear plant `dx/dt = f(x, u)`, `y = C x`, with a declared equilibrium.
#[derive(Clone)]
pub struct NonlinearSystem {
    pub field: Arc<dyn VectorField>,
    pub c: Mat,
    pub x0: Vector,
    pub u0: Vector,
    /// Spectral bound of the equilibrium linearization; integrators derive
    /// their stable step size from it.
    pub fast_scale: f64,
}

impl NonlinearSystem {
    /// Validates that the declared equilibrium is genuine:
    /// `||f(x0, u0)|| <= 1e-8 (1 + ||x0||)`.
    pub fn new(field: Arc<dyn VectorField>, c: Mat, x0: Vector, u0: Vector) -> Result<Self> {
        let n = field.dim();
        if x0.len() != n || c.ncols() != n {
            return Err(Error::dim("x0/C dimensions inconsistent with the vector field"));
        }
        if u0.len() != field.inputs() {
            return Err(Error::dim("u0 length inconsistent with the vector field"));
        }
        let mut fx = Vector::zeros(n);
        field.eval(&x0, &u0, &mut fx);
        let res = fx.norm();
        if res > 1e-8 * (1.0 + x0.norm()) {
            return Err(Error::domain(format!(
                "declared equilibrium has residual {res:.3e}"
            )));
        }
        let mut sys = NonlinearSystem { field, c, x0, u0, fast_scale: 1.0 };
        let (a_lin, _) = simulate::linearize(&sys, &sys.x0.clone(), &sys.u0.clone())?;
        sys.fast_scale = a_lin
            .complex_eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max)
            .max(1e-9);
        Ok(sys)
    }

    /// RK4 substeps needed to advance `dt` stably and accurately.
    pub fn substeps_for(&self, dt: f64) -> usize {
        ((dt * self.fast_scale / 0.3).ceil() as usize).max(1)
    }

    pub fn n(&self) -> usize {
        self.field.dim()
    }
    pub fn inputs(&self) -> usize {
        self.field.inputs()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }
}

impl core::fmt::Debug for NonlinearSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("NonlinearSystem")
            .field("n", &self.n())
            .field("m", &self.inputs())
            .field("p", &self.outputs())
            .finish()
    }
}

/// A full-order plant of either kind.
#[derive(Debug, Clone)]
pub enum Plant {
    Lti(LtiSystem),
    Nonlinear(NonlinearSystem),
}

impl Plant {
    pub fn n(&self) -> usize {
        match self {
            Plant::Lti(s) => s.n(),
            Plant::Nonlinear(s) => s.n(),
        }
    }
    pub fn inputs(&self) -> usize {
        match self {
            Plant::Lti(s) => s.inputs(),
            Plant::Nonlinear(s) => s.inputs(),
        }
    }
    pub fn outputs(&self) -> usize {
        match self {
            Plant::Lti(s) => s.outputs(),
            Plant::Nonlinear(s) => s.outputs(),
        }
    }
    pub fn output_matrix(&self) -> &Mat {
        match self {
            Plant::Lti(s) => &s.c,
            Plant::Nonlinear(s) => &s.c,
        }
    }
    pub fn is_nonlinear(&self) -> bool {
        matches!(self, Plant::Nonlinear(_))
    }
    /// Nominal initial state (equilibrium for nonlinear plants, origin for
    /// linear ones).
    pub fn nominal_state(&self) -> Vector {
        match self {
            Plant::Lti(s) => Vector::zeros(s.n()),
            Plant::Nonlinear(s) => s.x0.clone(),
        }
    }
}
