//! Serialization of results. Floats use Rust's shortest round-trip decimal
//! form; infinite interval ends are written `-inf` / `inf`.

use std::io::Write;
use std::path::{Path, PathBuf};

use hetci::{CoverageReport, DesignKind, Family, QuantileCI, ReplicationRecord};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, Result};

pub fn format_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

/// JSON number when finite, otherwise the string used in CSV output.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(format_f64(x))
    }
}

/// Writes to `-` (stdout) or atomically to a file via a temporary sibling.
pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| CliError::Output {
        path: path.display().to_string(),
        source,
    };
    if path == Path::new("-") {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        return lock.write_all(contents.as_bytes()).map_err(io_err);
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// `<path>.<suffix>` next to an output file; `None` for stdout.
pub fn sidecar(path: &Path, suffix: &str) -> Option<PathBuf> {
    if path == Path::new("-") {
        return None;
    }
    let mut name = path.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    Some(PathBuf::from(name))
}

pub const CI_CSV_HEADER: &str = "method,n,groups,tau,alpha,point,variance,lindeberg_scale,half_width,lower,upper,lower_clipped,upper_clipped,low_information_warning";

fn ci_csv_row(method: &str, groups: usize, ci: &QuantileCI) -> String {
    format!(
        "{method},{},{groups},{},{},{},{},{},{},{},{},{},{},{}",
        ci.n,
        format_f64(ci.tau),
        format_f64(ci.alpha),
        format_f64(ci.point),
        format_f64(ci.variance),
        format_f64(ci.lindeberg_scale),
        format_f64(ci.half_width_level),
        format_f64(ci.lower),
        format_f64(ci.upper),
        ci.lower_clipped,
        ci.upper_clipped,
        ci.low_information_warning
    )
}

pub fn ci_csv(groups: usize, het: &QuantileCI, iid: &QuantileCI) -> String {
    format!(
        "{CI_CSV_HEADER}\n{}\n{}\n",
        ci_csv_row("heterogeneous", groups, het),
        ci_csv_row("iid", groups, iid)
    )
}

fn ci_json_value(ci: &QuantileCI) -> Value {
    json!({
        "point": json_f64(ci.point),
        "variance": json_f64(ci.variance),
        "lindeberg_scale": json_f64(ci.lindeberg_scale),
        "half_width": json_f64(ci.half_width_level),
        "lower": json_f64(ci.lower),
        "upper": json_f64(ci.upper),
        "lower_clipped": ci.lower_clipped,
        "upper_clipped": ci.upper_clipped,
        "low_information_warning": ci.low_information_warning,
    })
}

pub fn ci_json(groups: usize, dropped: &[String], het: &QuantileCI, iid: &QuantileCI) -> String {
    let value = json!({
        "n": het.n,
        "groups": groups,
        "tau": het.tau,
        "alpha": het.alpha,
        "dropped_singletons": dropped,
        "heterogeneous": ci_json_value(het),
        "iid": ci_json_value(iid),
    });
    let mut s = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    s.push('\n');
    s
}

pub const REPORT_CSV_HEADER: &str = "family,gamma,design,n,tau,alpha,reps,seed,completed,failures,coverage_het,coverage_iid,q_bar,population_variance,mean_v_hat,mean_v_tilde,mean_width_het,mean_width_iid,lower_clips_het,upper_clips_het,var_error_het,var_error_iid,error_variance_ratio,population_ratio";

pub fn report_csv_row(r: &CoverageReport) -> String {
    let floats = [
        r.coverage_het,
        r.coverage_iid,
        r.q_bar,
        r.population_variance,
        r.mean_v_hat,
        r.mean_v_tilde,
        r.mean_width_het,
        r.mean_width_iid,
    ];
    let mut row = format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.family,
        format_f64(r.gamma),
        r.design,
        r.n,
        format_f64(r.tau),
        format_f64(r.alpha),
        r.reps,
        r.seed,
        r.completed,
        r.failures
    );
    for x in floats {
        row.push(',');
        row.push_str(&format_f64(x));
    }
    row.push_str(&format!(
        ",{},{},{},{},{},{}",
        r.lower_clips_het,
        r.upper_clips_het,
        format_f64(r.var_error_het),
        format_f64(r.var_error_iid),
        format_f64(r.error_variance_ratio),
        format_f64(r.population_ratio)
    ));
    row
}

pub fn reports_csv<'a>(reports: impl IntoIterator<Item = &'a CoverageReport>) -> String {
    let mut out = format!("{REPORT_CSV_HEADER}\n");
    for r in reports {
        out.push_str(&report_csv_row(r));
        out.push('\n');
    }
    out
}

/// Coverage in the layout of the published table: one block per design,
/// rows by γ, columns I/II/III. Missing cells are left empty.
pub fn coverage_table_csv(reports: &[CoverageReport]) -> String {
    let mut out = String::from("design,gamma,I,II,III\n");
    for design in DesignKind::ALL {
        let mut gammas: Vec<f64> = reports
            .iter()
            .filter(|r| r.design == design)
            .map(|r| r.gamma)
            .collect();
        gammas.sort_by(f64::total_cmp);
        gammas.dedup();
        for gamma in gammas {
            out.push_str(&format!("{design},{}", format_f64(gamma)));
            for family in Family::ALL {
                out.push(',');
                if let Some(r) = reports
                    .iter()
                    .find(|r| r.design == design && r.family == family && r.gamma == gamma)
                {
                    out.push_str(&format_f64(r.coverage_het));
                }
            }
            out.push('\n');
        }
    }
    out
}

pub const ERRORS_CSV_HEADER: &str = "rep_id,error_het,error_iid,v_hat,v_tilde,width_het,width_iid";

pub fn errors_csv(records: &[ReplicationRecord]) -> String {
    let mut out = format!("{ERRORS_CSV_HEADER}\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.rep_id,
            format_f64(r.error_het),
            format_f64(r.error_iid),
            format_f64(r.v_hat),
            format_f64(r.v_tilde),
            format_f64(r.width_het),
            format_f64(r.width_iid)
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSummary {
    pub reps: usize,
    pub failures: usize,
    pub var_error_het: f64,
    pub var_error_iid: f64,
    pub ratio: f64,
    pub population_ratio: f64,
}

pub fn error_summary_csv(s: &ErrorSummary) -> String {
    format!(
        "reps,failures,var_error_het,var_error_iid,ratio,population_ratio\n{},{},{},{},{},{}\n",
        s.reps,
        s.failures,
        format_f64(s.var_error_het),
        format_f64(s.var_error_iid),
        format_f64(s.ratio),
        format_f64(s.population_ratio)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, 94.96000000000001, 1e-300, -2.5e17] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_f64(f64::INFINITY), "inf");
        assert_eq!(format_f64(2.0), "2");
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar(Path::new("-"), "manifest.json"), None);
        assert_eq!(
            sidecar(Path::new("out/table.csv"), "manifest.json").unwrap(),
            PathBuf::from("out/table.csv.manifest.json")
        );
    }
}
