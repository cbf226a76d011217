//! Dense LU factorization with forward and transpose solves, instrumented
//! by a [`SolveLedger`] that counts every right-hand-side solve.
//!
//! One solved right-hand side is the accounting unit for method cost
//! comparisons; factorizations are counted separately because a single
//! factorization serves any number of forward and transpose solves.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is declared singular.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Which cost bucket a solve against the original matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveKind {
    /// Base-case solve of the model itself (nominal state, re-solves at
    /// perturbed parameters for finite differences).
    Nominal,
    /// Solve performed on behalf of a sensitivity method.
    Sensitivity,
}

/// Counters of linear-system work, the unit of all cost claims.
///
/// Counts depend only on the sequence of operations invoked, never on the
/// numerical values involved. Workers may keep private ledgers and merge
/// them additively.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SolveLedger {
    pub nominal_solves: u64,
    pub forward_sensitivity_solves: u64,
    pub adjoint_solves: u64,
    pub factorizations: u64,
}

impl SolveLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total sensitivity-attributed solves: forward sensitivity plus adjoint.
    pub fn sensitivity_total(&self) -> u64 {
        self.forward_sensitivity_solves + self.adjoint_solves
    }

    /// Component-wise addition, for joining per-worker ledgers.
    pub fn merge(&mut self, other: &SolveLedger) {
        self.nominal_solves += other.nominal_solves;
        self.forward_sensitivity_solves += other.forward_sensitivity_solves;
        self.adjoint_solves += other.adjoint_solves;
        self.factorizations += other.factorizations;
    }
}

/// LU factorization with partial pivoting of a square real matrix.
///
/// Immutable after creation; supports solves with the matrix and with its
/// transpose against unlimited right-hand sides, without refactorizing.
#[derive(Debug, Clone)]
pub struct Factorization {
    /// Packed L (unit lower, below diagonal) and U (upper, on and above).
    lu: Array2<f64>,
    /// Row permutation: elimination step i worked on original row `perm[i]`.
    perm: Vec<usize>,
    n: usize,
}

/// Factorize a square matrix, incrementing the factorization counter.
///
/// Fails when any pivot magnitude does not exceed `PIVOT_RTOL` times the
/// largest absolute entry of the input, reporting the failing pivot index.
pub fn factorize(matrix: &Array2<f64>, ledger: &mut SolveLedger) -> Result<Factorization> {
    let (rows, cols) = matrix.dim();
    if rows != cols || rows == 0 {
        return Err(Error::ShapeMismatch {
            field: "matrix".into(),
            expected: "square, nonempty".into(),
            found: format!("{rows}x{cols}"),
        });
    }
    let n = rows;
    let mut max_abs = 0.0f64;
    for &v in matrix.iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                field: "matrix".into(),
            });
        }
        max_abs = max_abs.max(v.abs());
    }
    let threshold = PIVOT_RTOL * max_abs;

    let mut lu = matrix.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        // Partial pivoting: bring the largest remaining entry into place.
        let mut best = col;
        let mut best_mag = lu[[col, col]].abs();
        for row in (col + 1)..n {
            let mag = lu[[row, col]].abs();
            if mag > best_mag {
                best = row;
                best_mag = mag;
            }
        }
        if best_mag.is_nan() || best_mag <= threshold {
            return Err(Error::SingularMatrix {
                pivot_index: col,
                pivot_magnitude: best_mag,
                threshold,
            });
        }
        if best != col {
            perm.swap(col, best);
            for j in 0..n {
                let tmp = lu[[col, j]];
                lu[[col, j]] = lu[[best, j]];
                lu[[best, j]] = tmp;
            }
        }
        let pivot = lu[[col, col]];
        for row in (col + 1)..n {
            let factor = lu[[row, col]] / pivot;
            lu[[row, col]] = factor;
            for j in (col + 1)..n {
                lu[[row, j]] -= factor * lu[[col, j]];
            }
        }
    }

    ledger.factorizations += 1;
    Ok(Factorization { lu, perm, n })
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = rhs`, charging the stated cost bucket.
    pub fn solve_forward(
        &self,
        rhs: &Array1<f64>,
        kind: SolveKind,
        ledger: &mut SolveLedger,
    ) -> Array1<f64> {
        assert_eq!(rhs.len(), self.n, "rhs length must match matrix dimension");
        match kind {
            SolveKind::Nominal => ledger.nominal_solves += 1,
            SolveKind::Sensitivity => ledger.forward_sensitivity_solves += 1,
        }
        let n = self.n;
        // Apply the row permutation, then L y = Pb, then U x = y.
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[i] = rhs[self.perm[i]];
        }
        for i in 1..n {
            let mut sum = x[i];
            for j in 0..i {
                sum -= self.lu[[i, j]] * x[j];
            }
            x[i] = sum;
        }
        for i in (0..n).rev() {
            let mut sum = x[i];
            for j in (i + 1)..n {
                sum -= self.lu[[i, j]] * x[j];
            }
            x[i] = sum / self.lu[[i, i]];
        }
        x
    }

    /// Solve `A^T x = rhs` using the same factorization (no refactorization).
    pub fn solve_adjoint(&self, rhs: &Array1<f64>, ledger: &mut SolveLedger) -> Array1<f64> {
        assert_eq!(rhs.len(), self.n, "rhs length must match matrix dimension");
        ledger.adjoint_solves += 1;
        let n = self.n;
        // With P A = L U: A^T x = U^T L^T P x = rhs.
        let mut t = Array1::zeros(n);
        // U^T w = rhs (forward substitution against U's diagonal).
        for i in 0..n {
            let mut sum = rhs[i];
            for j in 0..i {
                sum -= self.lu[[j, i]] * t[j];
            }
            t[i] = sum / self.lu[[i, i]];
        }
        // L^T t = w (back substitution, unit diagonal).
        for i in (0..n).rev() {
            let mut sum = t[i];
            for j in (i + 1)..n {
                sum -= self.lu[[j, i]] * t[j];
            }
            t[i] = sum;
        }
        // Undo the permutation: (P x)_i = t_i.
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = t[i];
        }
        x
    }
}
