//! Exact first- and second-order sensitivities of scalar responses of
//! parameterized linear systems.
//!
//! A problem couples a parameter-dependent operator family `L(alpha)`, a
//! source family `Q(alpha)`, and a scalar response `R(u, alpha)` evaluated
//! at the state solving `L(alpha) u = Q(alpha)`. This crate computes the
//! gradient and the full Hessian of the response over all parameters by
//! forward (tangent) and adjoint procedures, instruments every linear
//! solve in a [`SolveLedger`], and provides an independent
//! finite-difference oracle for verification.
//!
//! The headline property of the adjoint route: the gradient plus the
//! complete `N x N` Hessian cost `2 N + 1` solves against a single
//! factorization, however large the state.
//!
//! ```
//! use sensas::{build_scalar_fixture, Analysis};
//!
//! let problem = build_scalar_fixture();
//! let mut analysis = Analysis::new(&problem).unwrap();
//! let gradient = analysis.asap_gradient().unwrap();
//! let hessian = analysis.so_asap_hessian().unwrap();
//! assert!((gradient.values[0] + 1.0).abs() < 1e-12);
//! assert!((hessian.values[[0, 0]] - 1.0).abs() < 1e-12);
//! assert_eq!(hessian.ledger.sensitivity_total(), 5);
//! ```

mod analysis;
mod error;
mod first_order;
mod linsolve;
mod model;
mod oracle;
mod paradigm;
mod second_order;

pub use analysis::{evaluate_nominal, Analysis};
pub use error::{Error, Result};
pub use first_order::{
    adjoint_solve, asap_effects, asap_gradient, asap_gradient_from, forward_sensitivity_rhs,
    fsap_gradient, GradientEffects, GradientMethod, SensitivityGradient,
};
pub use linsolve::{factorize, Factorization, SolveKind, SolveLedger, PIVOT_RTOL};
pub use model::{
    build_affine_quadratic_problem, check_derivative_callbacks, AdjointVector,
    AffineQuadraticProblem, ConcomitantHooks, ConsistencyReport, OperatorFamily, ParameterVector,
    Problem, ResponseFunctional, SourceFamily, StateVector, ZeroConcomitant,
};
pub use oracle::{fd_gradient, fd_hessian, fd_response, FDConfig, HESSIAN_STEP_FACTOR};
pub use paradigm::{
    build_scalar_fixture, build_slab_diffusion, scalar_fixture_parts, slab_affine_parts,
    uniform_slab_config, Detector, Region, ResponseKind, SlabConfig,
};
pub use second_order::{
    direct_effect_row, indirect_effect_row, sass_solve, sass_sources, so_asap_hessian,
    so_asap_reference_count, so_fsap_hessian, so_fsap_reference_count, HessianMatrix,
    HessianMethod, SassPair, SassSources,
};
