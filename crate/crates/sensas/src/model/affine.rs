//! A concrete, serializable problem class: the operator and source are
//! quadratic in the parameters and the response is quadratic in `(u, alpha)`,
//! so every derivative callback has a closed form.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::{Array1, Array2};

use super::{OperatorFamily, ParameterVector, Problem, ResponseFunctional, SourceFamily, ZeroConcomitant};
use crate::error::{Error, Result};

/// Relative asymmetry beyond which `M` and `G` are rejected.
const SYM_RTOL: f64 = 1e-12;

/// Problem data with closed-form derivatives:
///
/// ```text
/// L(alpha) = L0 + sum_k alpha_k L1[k] + 1/2 sum_{j,k} alpha_j alpha_k L2[j,k]
/// Q(alpha) = q0 + sum_k alpha_k q1[k] + 1/2 sum_{j,k} alpha_j alpha_k q2[j,k]
/// R(u, a)  = c.u + 1/2 u.M.u + u.N.a + d.a + 1/2 a.G.a
/// ```
///
/// Quadratic blocks are stored once per unordered pair with key `(j, k)`,
/// `j <= k`, and applied symmetrically. Absent map entries are zero blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineQuadraticProblem {
    pub state_dim: usize,
    pub param_dim: usize,
    pub l0: Array2<f64>,
    pub l1: BTreeMap<usize, Array2<f64>>,
    pub l2: BTreeMap<(usize, usize), Array2<f64>>,
    pub q0: Array1<f64>,
    pub q1: BTreeMap<usize, Array1<f64>>,
    pub q2: BTreeMap<(usize, usize), Array1<f64>>,
    /// Linear response coefficient on the state, length `K_u`.
    pub c: Array1<f64>,
    /// Quadratic response block on the state, `K_u x K_u`, symmetric.
    pub m: Array2<f64>,
    /// Bilinear state-parameter response block, `K_u x N_alpha`.
    pub n: Array2<f64>,
    /// Linear response coefficient on the parameters, length `N_alpha`.
    pub d: Array1<f64>,
    /// Quadratic response block on the parameters, symmetric.
    pub g: Array2<f64>,
}

impl AffineQuadraticProblem {
    /// All-zero problem data of the given dimensions.
    pub fn zeros(state_dim: usize, param_dim: usize) -> Self {
        Self {
            state_dim,
            param_dim,
            l0: Array2::zeros((state_dim, state_dim)),
            l1: BTreeMap::new(),
            l2: BTreeMap::new(),
            q0: Array1::zeros(state_dim),
            q1: BTreeMap::new(),
            q2: BTreeMap::new(),
            c: Array1::zeros(state_dim),
            m: Array2::zeros((state_dim, state_dim)),
            n: Array2::zeros((state_dim, param_dim)),
            d: Array1::zeros(param_dim),
            g: Array2::zeros((param_dim, param_dim)),
        }
    }

    /// Validate shapes, index ranges, finiteness, and the symmetry of the
    /// blocks that must be symmetric. Errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let k_u = self.state_dim;
        let n_a = self.param_dim;
        if k_u == 0 {
            return Err(shape("state_dim", ">= 1", "0"));
        }
        if n_a == 0 {
            return Err(shape("param_dim", ">= 1", "0"));
        }
        check_matrix("L0", &self.l0, (k_u, k_u))?;
        for (k, block) in &self.l1 {
            if *k >= n_a {
                return Err(Error::IndexOutOfRange {
                    what: "L first-derivative block parameter",
                    index: *k,
                    len: n_a,
                });
            }
            check_matrix(&format!("L {}", k + 1), block, (k_u, k_u))?;
        }
        for ((j, k), block) in &self.l2 {
            check_pair("L2", *j, *k, n_a)?;
            check_matrix(&format!("L2 {} {}", j + 1, k + 1), block, (k_u, k_u))?;
        }
        check_vector("q0", &self.q0, k_u)?;
        for (k, block) in &self.q1 {
            if *k >= n_a {
                return Err(Error::IndexOutOfRange {
                    what: "q first-derivative block parameter",
                    index: *k,
                    len: n_a,
                });
            }
            check_vector(&format!("q {}", k + 1), block, k_u)?;
        }
        for ((j, k), block) in &self.q2 {
            check_pair("q2", *j, *k, n_a)?;
            check_vector(&format!("q2 {} {}", j + 1, k + 1), block, k_u)?;
        }
        check_vector("c", &self.c, k_u)?;
        check_matrix("M", &self.m, (k_u, k_u))?;
        check_symmetric("M", &self.m)?;
        check_matrix("N", &self.n, (k_u, n_a))?;
        check_vector("d", &self.d, n_a)?;
        check_matrix("G", &self.g, (n_a, n_a))?;
        check_symmetric("G", &self.g)?;
        Ok(())
    }

    fn l2_block(&self, j: usize, k: usize) -> Option<&Array2<f64>> {
        self.l2.get(&canonical(j, k))
    }

    fn q2_block(&self, j: usize, k: usize) -> Option<&Array1<f64>> {
        self.q2.get(&canonical(j, k))
    }
}

fn canonical(j: usize, k: usize) -> (usize, usize) {
    if j <= k {
        (j, k)
    } else {
        (k, j)
    }
}

fn shape(field: &str, expected: &str, found: &str) -> Error {
    Error::ShapeMismatch {
        field: field.into(),
        expected: expected.into(),
        found: found.into(),
    }
}

fn check_matrix(field: &str, m: &Array2<f64>, want: (usize, usize)) -> Result<()> {
    if m.dim() != want {
        return Err(shape(
            field,
            &format!("{}x{}", want.0, want.1),
            &format!("{}x{}", m.dim().0, m.dim().1),
        ));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            field: field.into(),
        });
    }
    Ok(())
}

fn check_vector(field: &str, v: &Array1<f64>, want: usize) -> Result<()> {
    if v.len() != want {
        return Err(shape(
            field,
            &format!("length {want}"),
            &format!("length {}", v.len()),
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            field: field.into(),
        });
    }
    Ok(())
}

fn check_pair(family: &str, j: usize, k: usize, n_a: usize) -> Result<()> {
    if j > k {
        return Err(Error::InvalidConfig {
            field: "quadratic block key",
            reason: format!("{family} indices must satisfy j <= k, got ({}, {})", j + 1, k + 1),
        });
    }
    if k >= n_a {
        return Err(Error::IndexOutOfRange {
            what: "quadratic block parameter",
            index: k,
            len: n_a,
        });
    }
    Ok(())
}

fn check_symmetric(field: &str, m: &Array2<f64>) -> Result<()> {
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return Ok(());
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    let rel = worst / scale;
    if rel > SYM_RTOL {
        return Err(Error::Asymmetric {
            field: field.into(),
            max_rel: rel,
        });
    }
    Ok(())
}

impl OperatorFamily for AffineQuadraticProblem {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn param_dim(&self) -> usize {
        self.param_dim
    }

    fn eval(&self, alpha: &Array1<f64>) -> Array2<f64> {
        let mut out = self.l0.clone();
        for (k, block) in &self.l1 {
            out.scaled_add(alpha[*k], block);
        }
        for ((j, k), block) in &self.l2 {
            // Stored once per unordered pair; the off-diagonal weight
            // absorbs both (j,k) and (k,j) terms of the double sum.
            let w = if j == k {
                0.5 * alpha[*j] * alpha[*k]
            } else {
                alpha[*j] * alpha[*k]
            };
            out.scaled_add(w, block);
        }
        out
    }

    fn d1(&self, alpha: &Array1<f64>, k: usize) -> Array2<f64> {
        let mut out = match self.l1.get(&k) {
            Some(block) => block.clone(),
            None => Array2::zeros((self.state_dim, self.state_dim)),
        };
        for j in 0..self.param_dim {
            if let Some(block) = self.l2_block(j, k) {
                out.scaled_add(alpha[j], block);
            }
        }
        out
    }

    fn d2(&self, _alpha: &Array1<f64>, j: usize, k: usize) -> Array2<f64> {
        match self.l2_block(j, k) {
            Some(block) => block.clone(),
            None => Array2::zeros((self.state_dim, self.state_dim)),
        }
    }
}

impl SourceFamily for AffineQuadraticProblem {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn param_dim(&self) -> usize {
        self.param_dim
    }

    fn eval(&self, alpha: &Array1<f64>) -> Array1<f64> {
        let mut out = self.q0.clone();
        for (k, block) in &self.q1 {
            out.scaled_add(alpha[*k], block);
        }
        for ((j, k), block) in &self.q2 {
            let w = if j == k {
                0.5 * alpha[*j] * alpha[*k]
            } else {
                alpha[*j] * alpha[*k]
            };
            out.scaled_add(w, block);
        }
        out
    }

    fn d1(&self, alpha: &Array1<f64>, k: usize) -> Array1<f64> {
        let mut out = match self.q1.get(&k) {
            Some(block) => block.clone(),
            None => Array1::zeros(self.state_dim),
        };
        for j in 0..self.param_dim {
            if let Some(block) = self.q2_block(j, k) {
                out.scaled_add(alpha[j], block);
            }
        }
        out
    }

    fn d2(&self, _alpha: &Array1<f64>, j: usize, k: usize) -> Array1<f64> {
        match self.q2_block(j, k) {
            Some(block) => block.clone(),
            None => Array1::zeros(self.state_dim),
        }
    }
}

impl ResponseFunctional for AffineQuadraticProblem {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn param_dim(&self) -> usize {
        self.param_dim
    }

    fn eval(&self, u: &Array1<f64>, alpha: &Array1<f64>) -> f64 {
        self.c.dot(u)
            + 0.5 * u.dot(&self.m.dot(u))
            + u.dot(&self.n.dot(alpha))
            + self.d.dot(alpha)
            + 0.5 * alpha.dot(&self.g.dot(alpha))
    }

    fn grad_u(&self, u: &Array1<f64>, alpha: &Array1<f64>) -> Array1<f64> {
        &self.c + &self.m.dot(u) + &self.n.dot(alpha)
    }

    fn grad_alpha(&self, u: &Array1<f64>, alpha: &Array1<f64>) -> Array1<f64> {
        &self.n.t().dot(u) + &self.d + &self.g.dot(alpha)
    }

    fn hess_uu(&self, _u: &Array1<f64>, _alpha: &Array1<f64>) -> Array2<f64> {
        self.m.clone()
    }

    fn hess_alpha_u(&self, _u: &Array1<f64>, _alpha: &Array1<f64>) -> Array2<f64> {
        self.n.clone()
    }

    fn hess_alpha_alpha(&self, _u: &Array1<f64>, _alpha: &Array1<f64>) -> Array2<f64> {
        self.g.clone()
    }
}

/// Validate the data and wrap it into a [`Problem`] at the given nominal
/// parameter point. The resulting callbacks are the closed forms of the
/// quadratic families, shared behind one allocation.
pub fn build_affine_quadratic_problem(
    data: AffineQuadraticProblem,
    alpha0: ParameterVector,
) -> Result<Problem> {
    data.validate()?;
    if alpha0.len() != data.param_dim {
        return Err(shape(
            "alpha0",
            &format!("length {}", data.param_dim),
            &format!("length {}", alpha0.len()),
        ));
    }
    let shared = Arc::new(data);
    Problem::new(
        shared.clone(),
        shared.clone(),
        shared,
        Arc::new(ZeroConcomitant),
        alpha0,
    )
}
