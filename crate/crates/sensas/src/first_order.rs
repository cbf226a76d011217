//! First-order sensitivities of the response with respect to every
//! parameter, by two equivalent routes:
//!
//! * the forward procedure (FSAP) solves one tangent system per parameter
//!   and contracts each solution with the response gradient;
//! * the adjoint procedure (ASAP) solves one transpose system with the
//!   response gradient as source, after which every sensitivity is an
//!   inner product, costing zero further solves.
//!
//! Both assemble the same vector `S`, with `S_k` the derivative of the
//! response along parameter `k` at the nominal point.

use ndarray::Array1;

use crate::analysis::Analysis;
use crate::error::{Error, Result};
use crate::linsolve::{Factorization, SolveLedger};
use crate::model::{AdjointVector, Problem, StateVector};

/// How a gradient was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMethod {
    Fsap,
    Asap,
    Fd,
}

impl std::fmt::Display for GradientMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GradientMethod::Fsap => "FSAP",
            GradientMethod::Asap => "ASAP",
            GradientMethod::Fd => "FD",
        })
    }
}

/// The first-order sensitivity vector together with the method that
/// produced it and the solve counts observed when it completed.
#[derive(Debug, Clone)]
pub struct SensitivityGradient {
    pub values: Array1<f64>,
    pub method: GradientMethod,
    pub ledger: SolveLedger,
}

impl SensitivityGradient {
    /// Total response variation along a direction of parameter variations:
    /// the contraction `S . h`.
    pub fn contract(&self, h_alpha: &Array1<f64>) -> f64 {
        self.values.dot(h_alpha)
    }
}

/// The two addends of the adjoint sensitivity formula, reported separately
/// for diagnostics: the direct effect is the explicit parameter dependence
/// of the response, the indirect effect is the part mediated by the state
/// (and any boundary-hook correction).
#[derive(Debug, Clone)]
pub struct GradientEffects {
    pub direct: Array1<f64>,
    pub indirect: Array1<f64>,
}

/// Right-hand side of the forward sensitivity system for parameter `k`:
/// `dQ/d alpha_k - (dL/d alpha_k) u0`, evaluated at the nominal point.
pub fn forward_sensitivity_rhs(
    problem: &Problem,
    u0: &StateVector,
    k: usize,
) -> Result<Array1<f64>> {
    let n_alpha = problem.param_dim();
    if k >= n_alpha {
        return Err(Error::IndexOutOfRange {
            what: "parameter",
            index: k,
            len: n_alpha,
        });
    }
    let alpha = &problem.alpha0.values;
    let dq = problem.source.d1(alpha, k);
    let dl_u = problem.operator.d1(alpha, k).dot(&u0.values);
    Ok(dq - dl_u)
}

/// Solve the adjoint sensitivity system `L^T psi = dR/du` at the nominal
/// point. Exactly one adjoint solve. Whenever `dR/du` does not depend on
/// the state (linear responses), the result is independent of `u0`.
pub fn adjoint_solve(
    problem: &Problem,
    u0: &StateVector,
    fact: &Factorization,
    ledger: &mut SolveLedger,
) -> AdjointVector {
    let rhs = problem
        .response
        .grad_u(&u0.values, &problem.alpha0.values);
    AdjointVector {
        values: fact.solve_adjoint(&rhs, ledger),
    }
}

/// Direct and indirect addends of the adjoint gradient formula.
/// Zero additional solves.
pub fn asap_effects(
    problem: &Problem,
    u0: &StateVector,
    psi0: &AdjointVector,
) -> Result<GradientEffects> {
    let alpha = &problem.alpha0.values;
    let n_alpha = problem.param_dim();
    let direct = problem.response.grad_alpha(&u0.values, alpha);
    let hook =
        problem
            .concomitant
            .dp_dalpha(&u0.values, &psi0.values, alpha, n_alpha);
    let mut indirect = Array1::zeros(n_alpha);
    for k in 0..n_alpha {
        let rhs = forward_sensitivity_rhs(problem, u0, k)?;
        indirect[k] = psi0.values.dot(&rhs) - hook[k];
    }
    Ok(GradientEffects { direct, indirect })
}

/// Assemble the full gradient from a nominal pair `(u0, psi0)`:
/// `S_k = dR/d alpha_k + psi0 . (dQ/d alpha_k - (dL/d alpha_k) u0)`,
/// minus the boundary-hook term. Zero additional solves.
pub fn asap_gradient_from(
    problem: &Problem,
    u0: &StateVector,
    psi0: &AdjointVector,
    ledger: &SolveLedger,
) -> Result<SensitivityGradient> {
    let effects = asap_effects(problem, u0, psi0)?;
    Ok(SensitivityGradient {
        values: &effects.direct + &effects.indirect,
        method: GradientMethod::Asap,
        ledger: *ledger,
    })
}

/// Gradient by the forward procedure on a fresh analysis of `problem`:
/// one factorization, one nominal solve, then one forward sensitivity
/// solve per parameter.
pub fn fsap_gradient(problem: &Problem) -> Result<SensitivityGradient> {
    Analysis::new(problem)?.fsap_gradient()
}

/// Gradient by the adjoint procedure on a fresh analysis of `problem`:
/// one factorization, one nominal solve, one adjoint solve.
pub fn asap_gradient(problem: &Problem) -> Result<SensitivityGradient> {
    Analysis::new(problem)?.asap_gradient()
}
