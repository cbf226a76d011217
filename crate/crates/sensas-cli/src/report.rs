//! Output files: `gradient.csv`, `hessian.csv`, and `ledger.txt`.
//!
//! Files are written to temporaries in the output directory and renamed
//! into place only after every write succeeded, so a failed run leaves no
//! partial outputs. CSV output uses `.` as the decimal separator and `\n`
//! line endings unconditionally; floating values carry 17 significant
//! digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sensas::{
    so_asap_reference_count, so_fsap_reference_count, HessianMatrix, ParameterVector,
    SensitivityGradient, SolveLedger,
};

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn gradient_csv(gradient: &SensitivityGradient, alpha: &ParameterVector) -> String {
    let mut out = String::from("index,name,value\n");
    for (k, v) in gradient.values.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", k + 1, alpha.name(k), format_float(*v)));
    }
    out
}

pub fn hessian_csv(values: &ndarray::Array2<f64>) -> String {
    let mut out = String::from("i,j,value\n");
    for i in 0..values.nrows() {
        for j in 0..values.ncols() {
            out.push_str(&format!(
                "{},{},{}\n",
                i + 1,
                j + 1,
                format_float(values[[i, j]])
            ));
        }
    }
    out
}

pub fn ledger_text(ledger: &SolveLedger, n_alpha: u64) -> String {
    format!(
        "nominal_solves={}\n\
         forward_sensitivity_solves={}\n\
         adjoint_solves={}\n\
         sensitivity_total={}\n\
         paper_formula_so_asap=2*N+1={}\n\
         paper_formula_so_fsap=N^2/2+3N/2={}\n",
        ledger.nominal_solves,
        ledger.forward_sensitivity_solves,
        ledger.adjoint_solves,
        ledger.sensitivity_total(),
        so_asap_reference_count(n_alpha),
        so_fsap_reference_count(n_alpha),
    )
}

/// Report contents ready to be written.
pub struct Reports {
    pub gradient: Option<String>,
    pub hessian: Option<String>,
    pub ledger: String,
}

impl Reports {
    pub fn assemble(
        gradient: Option<&SensitivityGradient>,
        hessian: Option<&HessianMatrix>,
        symmetrize: bool,
        ledger: &SolveLedger,
        alpha: &ParameterVector,
    ) -> Self {
        let hessian_text = hessian.map(|h| {
            if symmetrize {
                hessian_csv(&h.symmetrized_values())
            } else {
                hessian_csv(&h.values)
            }
        });
        Reports {
            gradient: gradient.map(|g| gradient_csv(g, alpha)),
            hessian: hessian_text,
            ledger: ledger_text(ledger, alpha.len() as u64),
        }
    }
}

fn stage(
    out_dir: &Path,
    name: &str,
    contents: &str,
    staged: &mut Vec<(PathBuf, PathBuf)>,
) -> std::io::Result<()> {
    let tmp = out_dir.join(format!("{name}.tmp"));
    let mut file = fs::File::create(&tmp)?;
    file.write_all(contents.as_bytes())?;
    file.sync_all()?;
    staged.push((tmp, out_dir.join(name)));
    Ok(())
}

fn stage_and_rename(
    reports: &Reports,
    out_dir: &Path,
    staged: &mut Vec<(PathBuf, PathBuf)>,
) -> std::io::Result<Vec<PathBuf>> {
    if let Some(text) = &reports.gradient {
        stage(out_dir, "gradient.csv", text, staged)?;
    }
    if let Some(text) = &reports.hessian {
        stage(out_dir, "hessian.csv", text, staged)?;
    }
    stage(out_dir, "ledger.txt", &reports.ledger, staged)?;
    let mut written = Vec::new();
    for (tmp, target) in staged.iter() {
        fs::rename(tmp, target)?;
        written.push(target.clone());
    }
    Ok(written)
}

/// Write all reports atomically; returns the paths renamed into place.
pub fn write_reports(reports: &Reports, out_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let result = stage_and_rename(reports, out_dir, &mut staged);
    if result.is_err() {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}
