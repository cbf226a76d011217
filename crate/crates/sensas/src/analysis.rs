//! Stateful driver for one problem at one nominal point: owns the
//! factorization of `L(alpha0)`, the solve ledger, and the reusable
//! intermediate solutions (nominal state, adjoint state, tangent
//! solutions), so that methods composed on the same analysis never repeat
//! a solve.

use ndarray::{Array1, Array2};

use crate::error::Result;
use crate::first_order::{
    adjoint_solve, asap_effects, forward_sensitivity_rhs, GradientEffects, GradientMethod,
    SensitivityGradient,
};
use crate::linsolve::{factorize, Factorization, SolveKind, SolveLedger};
use crate::model::{AdjointVector, Problem, StateVector};
use crate::second_order::{
    direct_effect_row, indirect_effect_row, sass_solve, sass_sources, HessianMatrix,
    HessianMethod, SassPair,
};

/// Solve the base-case system `L(alpha0) u0 = Q(alpha0)` with a fresh
/// factorization, charging one factorization and one nominal solve.
pub fn evaluate_nominal(problem: &Problem, ledger: &mut SolveLedger) -> Result<StateVector> {
    let alpha = &problem.alpha0.values;
    let fact = factorize(&problem.operator.eval(alpha), ledger)?;
    let q = problem.source.eval(alpha);
    StateVector::new(fact.solve_forward(&q, SolveKind::Nominal, ledger))
}

/// One problem under analysis. Create once, then ask for gradients and
/// Hessians; intermediate solutions are cached and the ledger accumulates
/// every solve performed on this analysis.
pub struct Analysis<'p> {
    problem: &'p Problem,
    fact: Factorization,
    ledger: SolveLedger,
    u0: Option<StateVector>,
    psi0: Option<AdjointVector>,
    /// Tangent solutions `h_u` per parameter, cached after the first
    /// forward-procedure pass and shared with the second-order forward
    /// route.
    tangents: Option<Vec<Array1<f64>>>,
}

impl<'p> Analysis<'p> {
    /// Factorize `L(alpha0)` once; everything else is lazy.
    pub fn new(problem: &'p Problem) -> Result<Self> {
        let mut ledger = SolveLedger::new();
        let l = problem.operator.eval(&problem.alpha0.values);
        let fact = factorize(&l, &mut ledger)?;
        Ok(Self {
            problem,
            fact,
            ledger,
            u0: None,
            psi0: None,
            tangents: None,
        })
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    pub fn ledger(&self) -> &SolveLedger {
        &self.ledger
    }

    pub fn factorization(&self) -> &Factorization {
        &self.fact
    }

    /// The nominal state, solved on first use (one nominal solve).
    pub fn nominal_state(&mut self) -> Result<&StateVector> {
        if self.u0.is_none() {
            let q = self.problem.source.eval(&self.problem.alpha0.values);
            let u = self.fact.solve_forward(&q, SolveKind::Nominal, &mut self.ledger);
            self.u0 = Some(StateVector::new(u)?);
        }
        Ok(self.u0.as_ref().unwrap())
    }

    /// The adjoint state, solved on first use (one adjoint solve).
    pub fn adjoint_state(&mut self) -> Result<&AdjointVector> {
        if self.psi0.is_none() {
            let u0 = self.nominal_state()?.clone();
            let psi = adjoint_solve(self.problem, &u0, &self.fact, &mut self.ledger);
            self.psi0 = Some(psi);
        }
        Ok(self.psi0.as_ref().unwrap())
    }

    /// Tangent solutions `h_u` for every parameter, solved on first use
    /// (one forward sensitivity solve per parameter).
    fn tangent_solutions(&mut self) -> Result<&Vec<Array1<f64>>> {
        if self.tangents.is_none() {
            let u0 = self.nominal_state()?.clone();
            let n_alpha = self.problem.param_dim();
            let mut tangents = Vec::with_capacity(n_alpha);
            for k in 0..n_alpha {
                let rhs = forward_sensitivity_rhs(self.problem, &u0, k)?;
                tangents.push(self.fact.solve_forward(
                    &rhs,
                    SolveKind::Sensitivity,
                    &mut self.ledger,
                ));
            }
            self.tangents = Some(tangents);
        }
        Ok(self.tangents.as_ref().unwrap())
    }

    /// First-order gradient by the forward procedure:
    /// `S_k = dR/d alpha_k + dR/du . h_u_k`.
    pub fn fsap_gradient(&mut self) -> Result<SensitivityGradient> {
        let u0 = self.nominal_state()?.clone();
        self.tangent_solutions()?;
        let alpha = &self.problem.alpha0.values;
        let grad_alpha = self.problem.response.grad_alpha(&u0.values, alpha);
        let grad_u = self.problem.response.grad_u(&u0.values, alpha);
        let tangents = self.tangents.as_ref().unwrap();
        let values = Array1::from_shape_fn(self.problem.param_dim(), |k| {
            grad_alpha[k] + grad_u.dot(&tangents[k])
        });
        Ok(SensitivityGradient {
            values,
            method: GradientMethod::Fsap,
            ledger: self.ledger,
        })
    }

    /// First-order gradient by the adjoint procedure; beyond the adjoint
    /// state itself, every sensitivity is an inner product.
    pub fn asap_gradient(&mut self) -> Result<SensitivityGradient> {
        let u0 = self.nominal_state()?.clone();
        let psi0 = self.adjoint_state()?.clone();
        let effects = asap_effects(self.problem, &u0, &psi0)?;
        Ok(SensitivityGradient {
            values: &effects.direct + &effects.indirect,
            method: GradientMethod::Asap,
            ledger: self.ledger,
        })
    }

    /// Direct and indirect addends of the adjoint gradient, separately.
    pub fn asap_gradient_effects(&mut self) -> Result<GradientEffects> {
        let u0 = self.nominal_state()?.clone();
        let psi0 = self.adjoint_state()?.clone();
        asap_effects(self.problem, &u0, &psi0)
    }

    /// The adjoint pair for Hessian row `i` (two solves).
    pub fn sass_pair(&mut self, i: usize) -> Result<SassPair> {
        let u0 = self.nominal_state()?.clone();
        let psi0 = self.adjoint_state()?.clone();
        let sources = sass_sources(self.problem, &u0, &psi0, i)?;
        Ok(sass_solve(
            self.problem,
            &self.fact,
            &u0,
            &sources,
            i,
            &mut self.ledger,
        ))
    }

    /// Full Hessian by the adjoint route: one adjoint pair per row,
    /// rows assembled independently.
    pub fn so_asap_hessian(&mut self) -> Result<HessianMatrix> {
        let u0 = self.nominal_state()?.clone();
        let psi0 = self.adjoint_state()?.clone();
        let n_alpha = self.problem.param_dim();
        let mut values = Array2::zeros((n_alpha, n_alpha));
        for i in 0..n_alpha {
            let pair = self.sass_pair(i)?;
            let direct = direct_effect_row(self.problem, &u0, &psi0, i)?;
            let indirect = indirect_effect_row(self.problem, &u0, &psi0, &pair)?;
            for j in 0..n_alpha {
                values[[i, j]] = direct[j] + indirect[j];
            }
        }
        Ok(HessianMatrix::new(
            values,
            HessianMethod::SoAsap,
            self.ledger,
        ))
    }

    /// Full Hessian by the forward route: per parameter `j`, the tangent
    /// solution and the differentiated adjoint solution
    /// `L^T h_psi_j = (d2R/dudu) h_u_j + (d2R/du da)_j - (dL/da_j)^T psi0`,
    /// then per row `i` the contraction of the row sources with them.
    pub fn so_fsap_hessian(&mut self) -> Result<HessianMatrix> {
        let u0 = self.nominal_state()?.clone();
        let psi0 = self.adjoint_state()?.clone();
        self.tangent_solutions()?;
        let alpha = &self.problem.alpha0.values;
        let n_alpha = self.problem.param_dim();

        let hess_uu = self.problem.response.hess_uu(&u0.values, alpha);
        let hess_au = self.problem.response.hess_alpha_u(&u0.values, alpha);

        let mut cotangents = Vec::with_capacity(n_alpha);
        for j in 0..n_alpha {
            let tangent = &self.tangents.as_ref().unwrap()[j];
            let mixed = hess_au.column(j).to_owned()
                - self.problem.operator.d1(alpha, j).t().dot(&psi0.values);
            let rhs = hess_uu.dot(tangent) + mixed;
            cotangents.push(self.fact.solve_adjoint(&rhs, &mut self.ledger));
        }

        let tangents = self.tangents.as_ref().unwrap();
        let mut values = Array2::zeros((n_alpha, n_alpha));
        for i in 0..n_alpha {
            let sources = sass_sources(self.problem, &u0, &psi0, i)?;
            let direct = direct_effect_row(self.problem, &u0, &psi0, i)?;
            for j in 0..n_alpha {
                values[[i, j]] = direct[j]
                    + sources.grad_u_si.dot(&tangents[j])
                    + sources.grad_psi_si.dot(&cotangents[j]);
            }
        }
        Ok(HessianMatrix::new(
            values,
            HessianMethod::SoFsap,
            self.ledger,
        ))
    }
}
