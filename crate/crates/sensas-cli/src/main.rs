use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sensas_cli::{
    run, Builtin, Method, ProblemSource, RunRequest, RunSummary,
};

/// Compute first- and second-order sensitivities of a scalar response of a
/// parameterized linear system, with exact solve accounting.
#[derive(Parser, Debug)]
#[command(name = "sensas", version, about)]
struct Cli {
    /// Problem file (see the README for the format)
    #[arg(long, conflicts_with = "builtin")]
    problem: Option<PathBuf>,

    /// Built-in fixture: P1 (scalar closed form), D1 (slab, linear
    /// detector), D2 (slab, quadratic norm)
    #[arg(long)]
    builtin: Option<Builtin>,

    /// Sensitivity method: fsap, asap, so-fsap, so-asap, or fd
    #[arg(long)]
    method: Option<Method>,

    /// Derivative order: 1 (gradient) or 2 (gradient and Hessian).
    /// Defaults to the method's natural order.
    #[arg(long)]
    order: Option<u8>,

    /// Output directory for gradient.csv / hessian.csv / ledger.txt
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Write the symmetrized Hessian (H + H^T)/2 instead of the raw rows
    #[arg(long)]
    symmetrize: bool,

    /// Relative step for the finite-difference method
    #[arg(long = "fd-step")]
    fd_step: Option<f64>,

    /// Only run the derivative-callback consistency check and exit
    #[arg(long = "check-only")]
    check_only: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let source = match (&cli.problem, cli.builtin) {
        (Some(path), None) => ProblemSource::File(path.clone()),
        (None, Some(builtin)) => ProblemSource::Builtin(builtin),
        _ => {
            eprintln!("error: exactly one of --problem or --builtin is required");
            return ExitCode::from(2);
        }
    };
    if cli.method.is_none() && !cli.check_only {
        eprintln!("error: --method is required unless --check-only is given");
        return ExitCode::from(2);
    }
    let order = cli
        .order
        .unwrap_or_else(|| cli.method.map_or(1, Method::default_order));

    let request = RunRequest {
        source,
        method: cli.method,
        order,
        out_dir: cli.out.clone(),
        symmetrize: cli.symmetrize,
        fd_rel_step: cli.fd_step,
        check_only: cli.check_only,
    };

    match run(&request) {
        Ok(summary) => {
            print_summary(&request, &summary);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn print_summary(request: &RunRequest, summary: &RunSummary) {
    println!(
        "problem: {} state unknowns, {} parameters",
        summary.problem.state_dim(),
        summary.problem.param_dim()
    );
    println!(
        "derivative check: worst relative discrepancy {:.3e}",
        summary.report.max_discrepancy()
    );
    if request.check_only {
        print!("{}", summary.report);
        return;
    }
    if let Some(gradient) = &summary.gradient {
        println!("gradient ({}):", gradient.method);
        for (k, v) in gradient.values.iter().enumerate() {
            println!("  {:>3} {:<12} {v:+.10e}", k + 1, summary.problem.alpha0.name(k));
        }
    }
    if let Some(hessian) = &summary.hessian {
        println!(
            "hessian ({}): max |H| = {:.6e}, asymmetry = {:.3e}{}",
            hessian.method,
            hessian.max_norm(),
            hessian.asymmetry,
            if request.symmetrize {
                " (written symmetrized)"
            } else {
                ""
            }
        );
    }
    println!(
        "solves: nominal={} forward_sensitivity={} adjoint={} (sensitivity total {})",
        summary.ledger.nominal_solves,
        summary.ledger.forward_sensitivity_solves,
        summary.ledger.adjoint_solves,
        summary.ledger.sensitivity_total()
    );
    for path in &summary.written {
        println!("wrote {}", path.display());
    }
}
