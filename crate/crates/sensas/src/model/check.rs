//! Central-difference probing of every derivative callback against the
//! quantity it claims to differentiate. Derivative callbacks are trusted
//! inputs everywhere else; this is the explicit safety valve.

use ndarray::{Array1, Array2};

use super::Problem;

/// Floor for the denominator of relative discrepancies, so that exactly
/// matching zero blocks report exactly zero.
const DENOM_FLOOR: f64 = 1e-30;

/// How many state coordinates to probe when the state is large.
const MAX_STATE_PROBES: usize = 24;

/// Maximum relative discrepancy per derivative block, where the reference
/// is a central difference of the block's parent quantity. A block that
/// matches a zero reference exactly reports exactly zero; non-finite
/// probe values report infinity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConsistencyReport {
    pub operator_d1: f64,
    pub operator_d2: f64,
    pub source_d1: f64,
    pub source_d2: f64,
    pub response_grad_u: f64,
    pub response_grad_alpha: f64,
    pub response_hess_uu: f64,
    pub response_hess_alpha_u: f64,
    pub response_hess_alpha_alpha: f64,
}

impl ConsistencyReport {
    /// Named block discrepancies, in a fixed reporting order.
    pub fn entries(&self) -> [(&'static str, f64); 9] {
        [
            ("operator_d1", self.operator_d1),
            ("operator_d2", self.operator_d2),
            ("source_d1", self.source_d1),
            ("source_d2", self.source_d2),
            ("response_grad_u", self.response_grad_u),
            ("response_grad_alpha", self.response_grad_alpha),
            ("response_hess_uu", self.response_hess_uu),
            ("response_hess_alpha_u", self.response_hess_alpha_u),
            ("response_hess_alpha_alpha", self.response_hess_alpha_alpha),
        ]
    }

    /// Worst discrepancy across all blocks.
    pub fn max_discrepancy(&self) -> f64 {
        self.entries()
            .iter()
            .fold(0.0f64, |acc, (_, v)| acc.max(*v))
    }

    /// True when every block is within `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.entries().iter().all(|(_, v)| *v <= tol)
    }
}

impl std::fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, value) in self.entries() {
            writeln!(f, "{name:<28}{value:.3e}")?;
        }
        Ok(())
    }
}

/// Probe every derivative callback with central differences at the nominal
/// parameter point and at one perturbed point, and report the worst
/// relative discrepancy per block.
///
/// Discrepancies are reported, never thrown. The relative reference is the
/// central-difference estimate, so a callback off by a factor of two reads
/// as a discrepancy near one, and parameter dependence invisible at the
/// probing step (for example swamped by a much larger constant part) reads
/// as a huge discrepancy. States with more than `MAX_STATE_PROBES`
/// components are probed on an evenly spaced subset of coordinates.
pub fn check_derivative_callbacks(problem: &Problem, step: f64) -> ConsistencyReport {
    assert!(step > 0.0, "probe step must be positive");

    let k_u = problem.state_dim();
    let alpha0 = problem.alpha0.values.clone();
    let alpha1 = alpha0.mapv(|a| a + 0.07 * (1.0 + a.abs()));

    // Deterministic probe states with entries of order one and no special
    // structure (integer arithmetic, so the pattern is platform-stable).
    let u_probe = Array1::from_shape_fn(k_u, |i| 1.0 + ((i * 37 % 11) as f64 - 5.0) / 16.0);
    let u_probe2 = Array1::from_shape_fn(k_u, |i| 0.75 + ((i * 23 % 13) as f64 - 6.0) / 8.0);

    let mut report = ConsistencyReport::default();
    for (alpha, u) in [(&alpha0, &u_probe), (&alpha1, &u_probe2)] {
        probe_point(problem, alpha, u, step, &mut report);
    }
    report
}

fn probe_point(
    problem: &Problem,
    alpha: &Array1<f64>,
    u: &Array1<f64>,
    step: f64,
    report: &mut ConsistencyReport,
) {
    let n_a = alpha.len();
    let op = problem.operator.as_ref();
    let src = problem.source.as_ref();
    let resp = problem.response.as_ref();

    // Operator and source first derivatives against eval.
    for k in 0..n_a {
        let (ap, am, h) = bump(alpha, k, step);
        let fd = (&op.eval(&ap) - &op.eval(&am)) / (2.0 * h);
        bump_max(&mut report.operator_d1, disc2(&op.d1(alpha, k), &fd));
        let fd = (&src.eval(&ap) - &src.eval(&am)) / (2.0 * h);
        bump_max(&mut report.source_d1, disc1(&src.d1(alpha, k), &fd));
    }

    // Second derivatives against first derivatives, over all pairs.
    for j in 0..n_a {
        let (ap, am, h) = bump(alpha, j, step);
        for k in 0..n_a {
            let fd = (&op.d1(&ap, k) - &op.d1(&am, k)) / (2.0 * h);
            bump_max(&mut report.operator_d2, disc2(&op.d2(alpha, j, k), &fd));
            let fd = (&src.d1(&ap, k) - &src.d1(&am, k)) / (2.0 * h);
            bump_max(&mut report.source_d2, disc1(&src.d2(alpha, j, k), &fd));
        }
    }

    // Response gradients against eval, Hessian blocks against gradients.
    let k_u = u.len();
    for m in state_probe_indices(k_u) {
        let (up, um, h) = bump(u, m, step);
        let fd = (resp.eval(&up, alpha) - resp.eval(&um, alpha)) / (2.0 * h);
        bump_max(
            &mut report.response_grad_u,
            disc_scalar(resp.grad_u(u, alpha)[m], fd),
        );
        let fd = (&resp.grad_u(&up, alpha) - &resp.grad_u(&um, alpha)) / (2.0 * h);
        let col = resp.hess_uu(u, alpha).column(m).to_owned();
        bump_max(&mut report.response_hess_uu, disc1(&col, &fd));
    }
    for j in 0..n_a {
        let (ap, am, h) = bump(alpha, j, step);
        let fd = (resp.eval(u, &ap) - resp.eval(u, &am)) / (2.0 * h);
        bump_max(
            &mut report.response_grad_alpha,
            disc_scalar(resp.grad_alpha(u, alpha)[j], fd),
        );
        let fd = (&resp.grad_u(u, &ap) - &resp.grad_u(u, &am)) / (2.0 * h);
        let col = resp.hess_alpha_u(u, alpha).column(j).to_owned();
        bump_max(&mut report.response_hess_alpha_u, disc1(&col, &fd));
        let fd = (&resp.grad_alpha(u, &ap) - &resp.grad_alpha(u, &am)) / (2.0 * h);
        let col = resp.hess_alpha_alpha(u, alpha).column(j).to_owned();
        bump_max(&mut report.response_hess_alpha_alpha, disc1(&col, &fd));
    }
}

fn state_probe_indices(k_u: usize) -> Vec<usize> {
    if k_u <= MAX_STATE_PROBES {
        (0..k_u).collect()
    } else {
        let mut idx: Vec<usize> = (0..MAX_STATE_PROBES)
            .map(|t| t * (k_u - 1) / (MAX_STATE_PROBES - 1))
            .collect();
        idx.dedup();
        idx
    }
}

/// Perturbed copies of `x` along coordinate `i`, with the step nudged to
/// the exactly representable difference.
fn bump(x: &Array1<f64>, i: usize, step: f64) -> (Array1<f64>, Array1<f64>, f64) {
    let h = step * (1.0 + x[i].abs());
    let mut plus = x.clone();
    let mut minus = x.clone();
    plus[i] = x[i] + h;
    minus[i] = x[i] - h;
    let h_eff = 0.5 * (plus[i] - minus[i]);
    (plus, minus, h_eff)
}

fn bump_max(slot: &mut f64, candidate: f64) {
    if candidate > *slot || candidate.is_nan() {
        *slot = if candidate.is_nan() {
            f64::INFINITY
        } else {
            candidate
        };
    }
}

fn rel(num: f64, den: f64) -> f64 {
    if !num.is_finite() {
        return f64::INFINITY;
    }
    if num == 0.0 {
        return 0.0;
    }
    num / den.max(DENOM_FLOOR)
}

fn disc2(callback: &Array2<f64>, fd: &Array2<f64>) -> f64 {
    let num = callback
        .iter()
        .zip(fd.iter())
        .fold(0.0f64, |acc, (c, f)| acc.max((c - f).abs()));
    let den = fd.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    rel(num, den)
}

fn disc1(callback: &Array1<f64>, fd: &Array1<f64>) -> f64 {
    let num = callback
        .iter()
        .zip(fd.iter())
        .fold(0.0f64, |acc, (c, f)| acc.max((c - f).abs()));
    let den = fd.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    rel(num, den)
}

fn disc_scalar(callback: f64, fd: f64) -> f64 {
    rel((callback - fd).abs(), fd.abs())
}
