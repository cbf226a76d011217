//! The parameterized linear model: `L(alpha) u = Q(alpha)` with a scalar
//! response `R(u, alpha)`, plus the derivative callbacks every sensitivity
//! method consumes.
//!
//! The model lives in a finite-dimensional, real setting: boundary and
//! initial conditions are assumed already folded into the rows of `L` and
//! `Q` by whoever builds the problem (Dirichlet elimination or ghost-row
//! substitution), the adjoint operator is the matrix transpose, and all
//! inner products are Euclidean. Under those conventions the boundary
//! pairing term of the adjoint identity vanishes identically; the
//! [`ConcomitantHooks`] trait is the extension seam for settings where it
//! does not, and its default implementation returns zeros.

mod affine;
mod check;

pub use affine::{build_affine_quadratic_problem, AffineQuadraticProblem};
pub use check::{check_derivative_callbacks, ConsistencyReport};

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Model parameter values at which sensitivities are evaluated.
#[derive(Debug, Clone)]
pub struct ParameterVector {
    pub values: Array1<f64>,
    /// Optional display names, one per parameter.
    pub names: Option<Vec<String>>,
}

impl ParameterVector {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ShapeMismatch {
                field: "alpha".into(),
                expected: "length >= 1".into(),
                found: "length 0".into(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: "alpha".into(),
            });
        }
        Ok(Self {
            values,
            names: None,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.values.len() {
            return Err(Error::ShapeMismatch {
                field: "alpha names".into(),
                expected: format!("length {}", self.values.len()),
                found: format!("length {}", names.len()),
            });
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Name of parameter `k`, falling back to `alpha_<k+1>`.
    pub fn name(&self, k: usize) -> String {
        match &self.names {
            Some(names) => names[k].clone(),
            None => format!("alpha_{}", k + 1),
        }
    }
}

/// State of the model, the solution of `L(alpha) u = Q(alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub values: Array1<f64>,
}

impl StateVector {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ShapeMismatch {
                field: "state".into(),
                expected: "length >= 1".into(),
                found: "length 0".into(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: "state".into(),
            });
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Adjoint function paired with the state space; same length as the state.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointVector {
    pub values: Array1<f64>,
}

impl AdjointVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The operator family `L(alpha)` and its parameter derivatives.
///
/// All callbacks must be pure: same inputs, same outputs, no observable
/// side effects. Implementations are shared read-only across workers.
pub trait OperatorFamily: Send + Sync {
    /// Number of state unknowns (matrix dimension).
    fn state_dim(&self) -> usize;
    /// Number of parameters.
    fn param_dim(&self) -> usize;
    /// `L(alpha)`, a dense square matrix.
    fn eval(&self, alpha: &Array1<f64>) -> Array2<f64>;
    /// `dL/d alpha_k`.
    fn d1(&self, alpha: &Array1<f64>, k: usize) -> Array2<f64>;
    /// `d^2 L / d alpha_j d alpha_k`; must be symmetric in `(j, k)`.
    fn d2(&self, alpha: &Array1<f64>, j: usize, k: usize) -> Array2<f64>;
}

/// The source family `Q(alpha)` and its parameter derivatives.
pub trait SourceFamily: Send + Sync {
    fn state_dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    /// `Q(alpha)`.
    fn eval(&self, alpha: &Array1<f64>) -> Array1<f64>;
    /// `dQ/d alpha_k`.
    fn d1(&self, alpha: &Array1<f64>, k: usize) -> Array1<f64>;
    /// `d^2 Q / d alpha_j d alpha_k`; symmetric in `(j, k)`.
    fn d2(&self, alpha: &Array1<f64>, j: usize, k: usize) -> Array1<f64>;
}

/// The scalar response `R(u, alpha)` with every derivative block the
/// second-order methods need.
pub trait ResponseFunctional: Send + Sync {
    fn state_dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    /// `R(u, alpha)`.
    fn eval(&self, u: &Array1<f64>, alpha: &Array1<f64>) -> f64;
    /// Gradient with respect to the state, length `K_u`.
    fn grad_u(&self, u: &Array1<f64>, alpha: &Array1<f64>) -> Array1<f64>;
    /// Gradient with respect to the parameters, length `N_alpha`.
    fn grad_alpha(&self, u: &Array1<f64>, alpha: &Array1<f64>) -> Array1<f64>;
    /// `d^2 R / du du`, `K_u x K_u`, symmetric.
    fn hess_uu(&self, u: &Array1<f64>, alpha: &Array1<f64>) -> Array2<f64>;
    /// `d^2 R / du d alpha`, `K_u x N_alpha` (row m, column j is the mixed
    /// derivative with respect to `u_m` and `alpha_j`).
    fn hess_alpha_u(&self, u: &Array1<f64>, alpha: &Array1<f64>) -> Array2<f64>;
    /// Explicit `d^2 R / d alpha d alpha`, `N_alpha x N_alpha`, symmetric.
    fn hess_alpha_alpha(&self, u: &Array1<f64>, alpha: &Array1<f64>) -> Array2<f64>;
}

/// Boundary-pairing corrections for settings where the adjoint identity
/// carries a nonvanishing boundary term. In the discrete setting used here
/// the term vanishes, and the default implementations return zeros of the
/// stated lengths.
pub trait ConcomitantHooks: Send + Sync {
    /// Parameter derivative of the boundary term in the first-order
    /// sensitivity formula; length `N_alpha`.
    fn dp_dalpha(
        &self,
        _u: &Array1<f64>,
        _psi: &Array1<f64>,
        _alpha: &Array1<f64>,
        n_alpha: usize,
    ) -> Array1<f64> {
        Array1::zeros(n_alpha)
    }

    /// State gradient of the i-th component of `dp_dalpha`; length `K_u`.
    fn grad_u_of_dp(
        &self,
        _u: &Array1<f64>,
        _psi: &Array1<f64>,
        _alpha: &Array1<f64>,
        _i: usize,
        k_u: usize,
    ) -> Array1<f64> {
        Array1::zeros(k_u)
    }

    /// Adjoint gradient of the i-th component of `dp_dalpha`; length `K_u`.
    fn grad_psi_of_dp(
        &self,
        _u: &Array1<f64>,
        _psi: &Array1<f64>,
        _alpha: &Array1<f64>,
        _i: usize,
        k_u: usize,
    ) -> Array1<f64> {
        Array1::zeros(k_u)
    }

    /// Boundary term of the second-order pairing for row `i`; length
    /// `N_alpha`.
    fn p2_row(
        &self,
        _u: &Array1<f64>,
        _alpha: &Array1<f64>,
        _psi1: &Array1<f64>,
        _psi2: &Array1<f64>,
        _i: usize,
        n_alpha: usize,
    ) -> Array1<f64> {
        Array1::zeros(n_alpha)
    }
}

/// The all-zero default hooks.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroConcomitant;

impl ConcomitantHooks for ZeroConcomitant {}

/// A complete sensitivity problem: operator, source, response, boundary
/// hooks, and the nominal parameter point.
///
/// Cloning is cheap (shared callbacks); `with_alpha0` re-centers the same
/// model at a different nominal point.
#[derive(Clone)]
pub struct Problem {
    pub operator: Arc<dyn OperatorFamily>,
    pub source: Arc<dyn SourceFamily>,
    pub response: Arc<dyn ResponseFunctional>,
    pub concomitant: Arc<dyn ConcomitantHooks>,
    pub alpha0: ParameterVector,
}

impl Problem {
    /// Assemble a problem, verifying that all members agree on dimensions.
    pub fn new(
        operator: Arc<dyn OperatorFamily>,
        source: Arc<dyn SourceFamily>,
        response: Arc<dyn ResponseFunctional>,
        concomitant: Arc<dyn ConcomitantHooks>,
        alpha0: ParameterVector,
    ) -> Result<Self> {
        let k_u = operator.state_dim();
        let n_alpha = operator.param_dim();
        if k_u == 0 {
            return Err(Error::ShapeMismatch {
                field: "operator".into(),
                expected: "state dimension >= 1".into(),
                found: "0".into(),
            });
        }
        let check = |field: &str, dims: (usize, usize)| -> Result<()> {
            if dims != (k_u, n_alpha) {
                return Err(Error::ShapeMismatch {
                    field: field.into(),
                    expected: format!("state {k_u}, params {n_alpha}"),
                    found: format!("state {}, params {}", dims.0, dims.1),
                });
            }
            Ok(())
        };
        check("source", (source.state_dim(), source.param_dim()))?;
        check("response", (response.state_dim(), response.param_dim()))?;
        check("alpha0", (k_u, alpha0.len()))?;
        Ok(Self {
            operator,
            source,
            response,
            concomitant,
            alpha0,
        })
    }

    /// State dimension `K_u`.
    pub fn state_dim(&self) -> usize {
        self.operator.state_dim()
    }

    /// Parameter count `N_alpha`.
    pub fn param_dim(&self) -> usize {
        self.alpha0.len()
    }

    /// The same model re-centered at a different nominal parameter point.
    pub fn with_alpha0(&self, alpha0: ParameterVector) -> Result<Self> {
        if alpha0.len() != self.param_dim() {
            return Err(Error::ShapeMismatch {
                field: "alpha0".into(),
                expected: format!("length {}", self.param_dim()),
                found: format!("length {}", alpha0.len()),
            });
        }
        let mut p = self.clone();
        p.alpha0 = alpha0;
        Ok(p)
    }
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("state_dim", &self.state_dim())
            .field("param_dim", &self.param_dim())
            .field("alpha0", &self.alpha0.values)
            .finish()
    }
}
