//! Batch front-end for the sensitivity engine: problem file parsing and
//! serialization, method dispatch, and report writing.

pub mod format;
pub mod report;
pub mod run;

pub use format::{parse_problem_text, serialize_affine, ParseError, ParsedProblem, MAGIC};
pub use report::{format_float, write_reports, Reports};
pub use run::{
    load_problem, run, Builtin, CliError, Method, ProblemSource, RunRequest, RunSummary,
    CHECK_ABORT_TOL, CHECK_STEP,
};
