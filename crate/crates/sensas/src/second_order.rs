//! The full Hessian of the response over all parameters, by two routes.
//!
//! Writing the first-order sensitivity `S_i` as a functional of the state,
//! the adjoint function, and the parameters, its variation splits into a
//! direct part (explicit parameter dependence, free to evaluate) and an
//! indirect part mediated by the state and adjoint variations. The two
//! routes differ in how they eliminate the indirect part:
//!
//! * the forward route (SO-FSAP) solves, per parameter direction, the
//!   tangent system for `h_u` and the differentiated adjoint system for
//!   `h_psi`, then contracts them against the sources of row `i`;
//! * the adjoint route (SO-ASAP) solves, per row `i`, a two-by-two
//!   triangular block system for the pair `(psi1, psi2)`, one solve with
//!   the operator and one with its transpose, after which the whole row
//!   costs only inner products.
//!
//! The adjoint route therefore finishes the gradient and the entire
//! Hessian in `2 N + 1` sensitivity solves, independent of how many
//! parameters feed each row.

use ndarray::{Array1, Array2};

use crate::analysis::Analysis;
use crate::error::{Error, Result};
use crate::first_order::forward_sensitivity_rhs;
use crate::linsolve::{Factorization, SolveKind, SolveLedger};
use crate::model::{AdjointVector, Problem, StateVector};

/// How a Hessian was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianMethod {
    SoFsap,
    SoAsap,
    Fd,
}

impl std::fmt::Display for HessianMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HessianMethod::SoFsap => "SO-FSAP",
            HessianMethod::SoAsap => "SO-ASAP",
            HessianMethod::Fd => "FD",
        })
    }
}

/// The matrix of second-order sensitivities `d^2 R / d alpha_j d alpha_i`.
///
/// Rows are assembled independently, so the raw matrix need not be exactly
/// symmetric; the observed asymmetry is recorded rather than removed, as a
/// numerical-quality signal. `symmetrized_values` is the opt-in average.
#[derive(Debug, Clone)]
pub struct HessianMatrix {
    pub values: Array2<f64>,
    pub method: HessianMethod,
    /// `max |H_ij - H_ji|` over `i < j`.
    pub asymmetry: f64,
    pub ledger: SolveLedger,
}

impl HessianMatrix {
    pub fn new(values: Array2<f64>, method: HessianMethod, ledger: SolveLedger) -> Self {
        let n = values.nrows();
        let mut asymmetry = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asymmetry = asymmetry.max((values[[i, j]] - values[[j, i]]).abs());
            }
        }
        Self {
            values,
            method,
            asymmetry,
            ledger,
        }
    }

    /// `(H + H^T) / 2`.
    pub fn symmetrized_values(&self) -> Array2<f64> {
        let n = self.values.nrows();
        Array2::from_shape_fn((n, n), |(i, j)| {
            0.5 * (self.values[[i, j]] + self.values[[j, i]])
        })
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// The adjoint pair solving the second adjoint sensitivity system for one
/// Hessian row.
#[derive(Debug, Clone)]
pub struct SassPair {
    pub psi1: AdjointVector,
    pub psi2: AdjointVector,
    pub row_index: usize,
}

/// Source vectors for row `i` of the second-order system: the gradients of
/// the sensitivity functional `S_i` with respect to the state and to the
/// adjoint function.
#[derive(Debug, Clone)]
pub struct SassSources {
    /// `d S_i / d u`: mixed response column minus the operator-derivative
    /// pullback of the adjoint, minus the boundary hook.
    pub grad_u_si: Array1<f64>,
    /// `d S_i / d psi`: the forward sensitivity right-hand side for `i`,
    /// minus the boundary hook.
    pub grad_psi_si: Array1<f64>,
}

/// Build the sources of row `i` from the nominal pair `(u0, psi0)`.
pub fn sass_sources(
    problem: &Problem,
    u0: &StateVector,
    psi0: &AdjointVector,
    i: usize,
) -> Result<SassSources> {
    let n_alpha = problem.param_dim();
    if i >= n_alpha {
        return Err(Error::IndexOutOfRange {
            what: "row index",
            index: i,
            len: n_alpha,
        });
    }
    let alpha = &problem.alpha0.values;
    let k_u = problem.state_dim();

    let rhs = forward_sensitivity_rhs(problem, u0, i)?;
    let hook_psi = problem
        .concomitant
        .grad_psi_of_dp(&u0.values, &psi0.values, alpha, i, k_u);
    let grad_psi_si = rhs - hook_psi;

    let mixed_col = problem
        .response
        .hess_alpha_u(&u0.values, alpha)
        .column(i)
        .to_owned();
    let pullback = problem.operator.d1(alpha, i).t().dot(&psi0.values);
    let hook_u = problem
        .concomitant
        .grad_u_of_dp(&u0.values, &psi0.values, alpha, i, k_u);
    let grad_u_si = mixed_col - pullback - hook_u;

    Ok(SassSources {
        grad_u_si,
        grad_psi_si,
    })
}

/// Solve the second adjoint sensitivity system for one row: first
/// `L psi2 = dS_i/dpsi` with the operator, then
/// `L^T psi1 = dS_i/du + (d^2R/du du)^T psi2` with its transpose.
/// Exactly two solves.
pub fn sass_solve(
    problem: &Problem,
    fact: &Factorization,
    u0: &StateVector,
    sources: &SassSources,
    row_index: usize,
    ledger: &mut SolveLedger,
) -> SassPair {
    let alpha = &problem.alpha0.values;
    let psi2 = fact.solve_forward(&sources.grad_psi_si, SolveKind::Sensitivity, ledger);
    let hess_uu = problem.response.hess_uu(&u0.values, alpha);
    let rhs1 = &sources.grad_u_si + &hess_uu.t().dot(&psi2);
    let psi1 = fact.solve_adjoint(&rhs1, ledger);
    SassPair {
        psi1: AdjointVector { values: psi1 },
        psi2: AdjointVector { values: psi2 },
        row_index,
    }
}

/// The direct-effect part of Hessian row `i`: entry `j` collects the
/// explicit second parameter derivatives,
/// `d^2R/da_j da_i + psi0 . (d^2Q/da_j da_i - (d^2L/da_j da_i) u0)`.
/// Free of solves.
pub fn direct_effect_row(
    problem: &Problem,
    u0: &StateVector,
    psi0: &AdjointVector,
    i: usize,
) -> Result<Array1<f64>> {
    let n_alpha = problem.param_dim();
    if i >= n_alpha {
        return Err(Error::IndexOutOfRange {
            what: "row index",
            index: i,
            len: n_alpha,
        });
    }
    let alpha = &problem.alpha0.values;
    let haa = problem.response.hess_alpha_alpha(&u0.values, alpha);
    let mut row = Array1::zeros(n_alpha);
    for j in 0..n_alpha {
        let q2 = problem.source.d2(alpha, j, i);
        let l2u = problem.operator.d2(alpha, j, i).dot(&u0.values);
        row[j] = haa[[i, j]] + psi0.values.dot(&(&q2 - &l2u));
    }
    Ok(row)
}

/// The indirect-effect part of Hessian row `i`, assembled from the row's
/// adjoint pair: entry `j` pairs `psi1` with the forward sensitivity
/// right-hand side for `j` and `psi2` with the differentiated-adjoint
/// right-hand side for `j`, minus the second-order boundary hook.
/// Free of solves.
pub fn indirect_effect_row(
    problem: &Problem,
    u0: &StateVector,
    psi0: &AdjointVector,
    pair: &SassPair,
) -> Result<Array1<f64>> {
    let n_alpha = problem.param_dim();
    let alpha = &problem.alpha0.values;
    let hess_au = problem.response.hess_alpha_u(&u0.values, alpha);
    let hook = problem.concomitant.p2_row(
        &u0.values,
        alpha,
        &pair.psi1.values,
        &pair.psi2.values,
        pair.row_index,
        n_alpha,
    );
    let mut row = Array1::zeros(n_alpha);
    for j in 0..n_alpha {
        let rhs_j = forward_sensitivity_rhs(problem, u0, j)?;
        let mixed_j = hess_au.column(j).to_owned()
            - problem.operator.d1(alpha, j).t().dot(&psi0.values);
        row[j] = pair.psi1.values.dot(&rhs_j) + pair.psi2.values.dot(&mixed_j) - hook[j];
    }
    Ok(row)
}

/// Full Hessian by the adjoint route on a fresh analysis: nominal and
/// adjoint solves plus one adjoint pair per row, `2 N + 1` sensitivity
/// solves in total.
pub fn so_asap_hessian(problem: &Problem) -> Result<HessianMatrix> {
    Analysis::new(problem)?.so_asap_hessian()
}

/// Full Hessian by the forward route on a fresh analysis: the tangent
/// solutions per parameter (shared with the first-order forward procedure
/// when already available), the adjoint solve, and one differentiated
/// adjoint solve per parameter.
pub fn so_fsap_hessian(problem: &Problem) -> Result<HessianMatrix> {
    Analysis::new(problem)?.so_fsap_hessian()
}

/// Reference solve budget of the adjoint route for the gradient plus the
/// full Hessian: `2 N + 1`.
pub fn so_asap_reference_count(n_alpha: u64) -> u64 {
    2 * n_alpha + 1
}

/// Reference solve budget of the forward route in its pairwise accounting:
/// `N^2/2 + 3N/2`, always an integer.
pub fn so_fsap_reference_count(n_alpha: u64) -> u64 {
    n_alpha * (n_alpha + 3) / 2
}
