//! Finite-difference ground truth for gradients and Hessians.
//!
//! The oracle never touches a derivative callback: it only re-solves the
//! model at perturbed parameters and evaluates the response, so it is an
//! independent check on every analytic route. Central differences
//! throughout, with the step chosen per parameter as
//! `max(rel_step * |alpha_k|, abs_floor)`.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::first_order::{GradientMethod, SensitivityGradient};
use crate::linsolve::{factorize, SolveKind, SolveLedger};
use crate::model::Problem;
use crate::second_order::{HessianMatrix, HessianMethod};

/// Step policy for the finite-difference probes.
#[derive(Debug, Clone, Copy)]
pub struct FDConfig {
    pub rel_step: f64,
    pub abs_floor: f64,
}

impl Default for FDConfig {
    fn default() -> Self {
        Self {
            rel_step: 1e-5,
            abs_floor: 1e-7,
        }
    }
}

/// Second differences divide by the squared step, so they need a coarser
/// probe than first differences to keep solver rounding from dominating.
/// The Hessian stencil therefore scales the configured base step by this
/// factor (a power of two, so the scaling itself is exact).
pub const HESSIAN_STEP_FACTOR: f64 = 32.0;

impl FDConfig {
    pub fn with_rel_step(rel_step: f64) -> Self {
        Self {
            rel_step,
            ..Self::default()
        }
    }

    fn step(&self, alpha_k: f64) -> f64 {
        (self.rel_step * alpha_k.abs()).max(self.abs_floor)
    }

    fn hessian_step(&self, alpha_k: f64) -> f64 {
        HESSIAN_STEP_FACTOR * self.step(alpha_k)
    }
}

/// Solve the model at the given parameters and evaluate the response.
/// One factorization and one nominal-kind solve.
pub fn fd_response(problem: &Problem, alpha: &Array1<f64>, ledger: &mut SolveLedger) -> Result<f64> {
    let l = problem.operator.eval(alpha);
    let fact = factorize(&l, ledger).map_err(|source| Error::SingularAt {
        alpha: alpha.to_vec(),
        source: Box::new(source),
    })?;
    let q = problem.source.eval(alpha);
    let u = fact.solve_forward(&q, SolveKind::Nominal, ledger);
    Ok(problem.response.eval(&u, alpha))
}

/// Central-difference gradient: `2 N` nominal-kind solves.
pub fn fd_gradient(problem: &Problem, cfg: &FDConfig) -> Result<SensitivityGradient> {
    let mut ledger = SolveLedger::new();
    let alpha0 = &problem.alpha0.values;
    let n_alpha = problem.param_dim();
    let mut values = Array1::zeros(n_alpha);
    for k in 0..n_alpha {
        let h = cfg.step(alpha0[k]);
        let mut plus = alpha0.clone();
        plus[k] += h;
        let mut minus = alpha0.clone();
        minus[k] -= h;
        let f_plus = fd_response(problem, &plus, &mut ledger)?;
        let f_minus = fd_response(problem, &minus, &mut ledger)?;
        values[k] = (f_plus - f_minus) / (plus[k] - minus[k]);
    }
    Ok(SensitivityGradient {
        values,
        method: GradientMethod::Fd,
        ledger,
    })
}

/// Central-stencil Hessian: diagonal entries from the 3-point second
/// difference, off-diagonal entries from the 4-point mixed stencil at
/// `alpha +/- h_i e_i +/- h_j e_j`, each unordered pair evaluated once and
/// mirrored (so the result is symmetric by construction). Function values
/// are cached and shared: `1 + 2N + 2N(N-1)` nominal-kind solves.
pub fn fd_hessian(problem: &Problem, cfg: &FDConfig) -> Result<HessianMatrix> {
    let mut ledger = SolveLedger::new();
    let alpha0 = &problem.alpha0.values;
    let n_alpha = problem.param_dim();
    let steps: Vec<f64> = (0..n_alpha).map(|k| cfg.hessian_step(alpha0[k])).collect();

    // Offsets are recorded in integer step units so the cache key is exact.
    let mut cache: BTreeMap<Vec<(usize, i8)>, f64> = BTreeMap::new();
    let mut eval = |offsets: &[(usize, i8)], ledger: &mut SolveLedger| -> Result<f64> {
        if let Some(v) = cache.get(offsets) {
            return Ok(*v);
        }
        let mut alpha = alpha0.clone();
        for &(k, s) in offsets {
            alpha[k] += f64::from(s) * steps[k];
        }
        let value = fd_response(problem, &alpha, ledger)?;
        cache.insert(offsets.to_vec(), value);
        Ok(value)
    };

    let f0 = eval(&[], &mut ledger)?;
    let mut values = Array2::zeros((n_alpha, n_alpha));
    for i in 0..n_alpha {
        let f_plus = eval(&[(i, 1)], &mut ledger)?;
        let f_minus = eval(&[(i, -1)], &mut ledger)?;
        values[[i, i]] = (f_plus - 2.0 * f0 + f_minus) / (steps[i] * steps[i]);
    }
    for i in 0..n_alpha {
        for j in (i + 1)..n_alpha {
            let pp = eval(&[(i, 1), (j, 1)], &mut ledger)?;
            let pm = eval(&[(i, 1), (j, -1)], &mut ledger)?;
            let mp = eval(&[(i, -1), (j, 1)], &mut ledger)?;
            let mm = eval(&[(i, -1), (j, -1)], &mut ledger)?;
            let mixed = (pp - pm - mp + mm) / (4.0 * steps[i] * steps[j]);
            values[[i, j]] = mixed;
            values[[j, i]] = mixed;
        }
    }
    Ok(HessianMatrix::new(values, HessianMethod::Fd, ledger))
}
