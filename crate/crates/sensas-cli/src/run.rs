//! Request validation and method dispatch.
//!
//! Every run first probes the derivative callbacks with finite differences
//! and aborts (its own exit status) when any block disagrees beyond
//! `CHECK_ABORT_TOL`, so no sensitivity method ever consumes derivatives
//! that contradict the model's own evaluations.

use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use sensas::{
    build_affine_quadratic_problem, build_scalar_fixture, build_slab_diffusion,
    check_derivative_callbacks, fd_gradient, fd_hessian, Analysis, ConsistencyReport, FDConfig,
    HessianMatrix, Problem, ResponseKind, SensitivityGradient, SolveLedger,
};

use crate::format::{parse_problem_text, ParseError, ParsedProblem};
use crate::report::{write_reports, Reports};

/// Probe step for the pre-run derivative check.
pub const CHECK_STEP: f64 = 1e-5;
/// Worst tolerated relative discrepancy before the run aborts.
pub const CHECK_ABORT_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("cannot read problem file {path}: {source}")]
    ReadFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid problem: {0}")]
    Build(sensas::Error),
    #[error("invalid request: {0}")]
    Request(String),
    #[error(
        "derivative callbacks are inconsistent with the model: worst relative discrepancy {worst:e} exceeds {CHECK_ABORT_TOL:e}\n{report}"
    )]
    InconsistentDerivatives {
        worst: f64,
        report: ConsistencyReport,
    },
    #[error("{0}")]
    Singular(sensas::Error),
    #[error("cannot write reports: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status: 2 parse/request, 3 consistency abort,
    /// 4 singular operator, 5 unwritable output.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::ReadFile { .. } | CliError::Build(_)
            | CliError::Request(_) => 2,
            CliError::InconsistentDerivatives { .. } => 3,
            CliError::Singular(_) => 4,
            CliError::Output(_) => 5,
        }
    }
}

fn classify(err: sensas::Error) -> CliError {
    match err {
        sensas::Error::SingularMatrix { .. } | sensas::Error::SingularAt { .. } => {
            CliError::Singular(err)
        }
        other => CliError::Build(other),
    }
}

/// Where the problem comes from.
#[derive(Debug, Clone)]
pub enum ProblemSource {
    File(PathBuf),
    Builtin(Builtin),
}

/// Built-in fixtures: the scalar closed-form problem and the uniform slab
/// with a linear detector or quadratic-norm response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    P1,
    D1,
    D2,
}

impl FromStr for Builtin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "P1" => Ok(Builtin::P1),
            "D1" => Ok(Builtin::D1),
            "D2" => Ok(Builtin::D2),
            other => Err(format!("unknown builtin `{other}` (expected P1, D1, or D2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fsap,
    Asap,
    SoFsap,
    SoAsap,
    Fd,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fsap" => Ok(Method::Fsap),
            "asap" => Ok(Method::Asap),
            "so-fsap" => Ok(Method::SoFsap),
            "so-asap" => Ok(Method::SoAsap),
            "fd" => Ok(Method::Fd),
            other => Err(format!(
                "unknown method `{other}` (expected fsap, asap, so-fsap, so-asap, or fd)"
            )),
        }
    }
}

impl Method {
    /// Natural derivative order when the request leaves it implicit.
    pub fn default_order(self) -> u8 {
        match self {
            Method::Fsap | Method::Asap | Method::Fd => 1,
            Method::SoFsap | Method::SoAsap => 2,
        }
    }
}

/// One batch run.
#[derive(Debug, Clone)]
pub struct RunRequest {
    pub source: ProblemSource,
    /// Required unless `check_only`.
    pub method: Option<Method>,
    /// 1 for gradient only, 2 for gradient plus Hessian.
    pub order: u8,
    pub out_dir: PathBuf,
    pub symmetrize: bool,
    pub fd_rel_step: Option<f64>,
    pub check_only: bool,
}

/// Everything a run produced.
pub struct RunSummary {
    pub problem: Problem,
    pub report: ConsistencyReport,
    pub gradient: Option<SensitivityGradient>,
    pub hessian: Option<HessianMatrix>,
    pub ledger: SolveLedger,
    pub written: Vec<PathBuf>,
}

/// Load a problem from a file or a builtin fixture.
pub fn load_problem(source: &ProblemSource) -> Result<Problem, CliError> {
    match source {
        ProblemSource::Builtin(Builtin::P1) => Ok(build_scalar_fixture()),
        ProblemSource::Builtin(Builtin::D1) => {
            build_slab_diffusion(&sensas::uniform_slab_config(ResponseKind::LinearDetector))
                .map_err(CliError::Build)
        }
        ProblemSource::Builtin(Builtin::D2) => {
            build_slab_diffusion(&sensas::uniform_slab_config(ResponseKind::QuadraticNorm))
                .map_err(CliError::Build)
        }
        ProblemSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadFile {
                path: path.clone(),
                source,
            })?;
            match parse_problem_text(&text)? {
                ParsedProblem::Affine { data, alpha0 } => {
                    build_affine_quadratic_problem(*data, alpha0).map_err(CliError::Build)
                }
                ParsedProblem::Slab(cfg) => build_slab_diffusion(&cfg).map_err(CliError::Build),
            }
        }
    }
}

/// Execute a request end to end: load, check, run the method, write the
/// reports.
pub fn run(request: &RunRequest) -> Result<RunSummary, CliError> {
    let problem = load_problem(&request.source)?;

    let report = check_derivative_callbacks(&problem, CHECK_STEP);
    let worst = report.max_discrepancy();
    if worst.is_nan() || worst > CHECK_ABORT_TOL {
        return Err(CliError::InconsistentDerivatives { worst, report });
    }

    if request.check_only {
        return Ok(RunSummary {
            problem,
            report,
            gradient: None,
            hessian: None,
            ledger: SolveLedger::new(),
            written: Vec::new(),
        });
    }

    let method = request.method.ok_or_else(|| {
        CliError::Request("a method is required unless running with check-only".into())
    })?;
    if request.order == 2 && matches!(method, Method::Fsap | Method::Asap) {
        return Err(CliError::Request(format!(
            "order 2 needs a second-order method (so-fsap, so-asap, or fd), not {method:?}"
        )));
    }
    if !(request.order == 1 || request.order == 2) {
        return Err(CliError::Request(format!(
            "order must be 1 or 2, got {}",
            request.order
        )));
    }

    let fd_cfg = match request.fd_rel_step {
        Some(step) if step > 0.0 => FDConfig::with_rel_step(step),
        Some(step) => {
            return Err(CliError::Request(format!(
                "fd step must be positive, got {step}"
            )))
        }
        None => FDConfig::default(),
    };

    let (gradient, hessian, ledger) = match method {
        Method::Fd => {
            let gradient = fd_gradient(&problem, &fd_cfg).map_err(classify)?;
            let mut ledger = gradient.ledger;
            let hessian = if request.order == 2 {
                let h = fd_hessian(&problem, &fd_cfg).map_err(classify)?;
                ledger.merge(&h.ledger);
                Some(h)
            } else {
                None
            };
            (Some(gradient), hessian, ledger)
        }
        Method::Fsap | Method::Asap | Method::SoFsap | Method::SoAsap => {
            let mut analysis = Analysis::new(&problem).map_err(classify)?;
            let forward = matches!(method, Method::Fsap | Method::SoFsap);
            let gradient = if forward {
                analysis.fsap_gradient().map_err(classify)?
            } else {
                analysis.asap_gradient().map_err(classify)?
            };
            let hessian = if request.order == 2 {
                Some(if forward {
                    analysis.so_fsap_hessian().map_err(classify)?
                } else {
                    analysis.so_asap_hessian().map_err(classify)?
                })
            } else {
                None
            };
            let ledger = *analysis.ledger();
            (Some(gradient), hessian, ledger)
        }
    };

    let reports = Reports::assemble(
        gradient.as_ref(),
        hessian.as_ref(),
        request.symmetrize,
        &ledger,
        &problem.alpha0,
    );
    let written = write_reports(&reports, &request.out_dir)?;

    Ok(RunSummary {
        problem,
        report,
        gradient,
        hessian,
        ledger,
        written,
    })
}
