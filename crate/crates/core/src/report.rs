//! Run reports, deterministic CSV emission, and tolerance verdicts.
//!
//! Every CSV starts with a `# schema:` comment followed by a header row that
//! documents the column order. Floats are written with 17 significant
//! digits so a read-back is bit-lossless, and identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

/// 17 significant digits; round-trips every finite f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const RESONANCES_SCHEMA: &str = "siegert-resonances/v1";
pub const SPECTRUM_SCHEMA: &str = "siegert-spectrum/v1";
pub const DO_CURVES_SCHEMA: &str = "siegert-do-curves/v1";
pub const DENSITY_SCHEMA: &str = "siegert-density/v1";
pub const MATRIX_SCHEMA: &str = "siegert-matrix/v1";
pub const VERDICT_SCHEMA: &str = "siegert-verdict/v1";

/// Outcome class of one resonance row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    /// Variational and oracle entries both present.
    Ok,
    /// Oracle disabled by configuration.
    NoOracle,
    /// Width extraction failed; message attached.
    WidthError(String),
    /// Exact solver failed for this candidate; message attached.
    OracleError(String),
}

impl RowStatus {
    fn encode(&self) -> String {
        // keep the status column comma-free
        let sanitize = |m: &str| m.replace(',', ";").replace('\n', " ");
        match self {
            RowStatus::Ok => "ok".to_string(),
            RowStatus::NoOracle => "no_oracle".to_string(),
            RowStatus::WidthError(m) => format!("width_error:{}", sanitize(m)),
            RowStatus::OracleError(m) => format!("oracle_error:{}", sanitize(m)),
        }
    }

    fn decode(text: &str) -> Result<Self, String> {
        if text == "ok" {
            Ok(RowStatus::Ok)
        } else if text == "no_oracle" {
            Ok(RowStatus::NoOracle)
        } else if let Some(m) = text.strip_prefix("width_error:") {
            Ok(RowStatus::WidthError(m.to_string()))
        } else if let Some(m) = text.strip_prefix("oracle_error:") {
            Ok(RowStatus::OracleError(m.to_string()))
        } else {
            Err(format!("unknown status {text:?}"))
        }
    }
}

/// One localized resonance with its variational and (optional) exact data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonanceRow {
    pub n0: usize,
    pub lambda_star: f64,
    pub do_min: f64,
    pub energy_var: f64,
    pub boundary_density: f64,
    pub gamma_var: Option<f64>,
    pub energy_exact: Option<f64>,
    pub gamma_exact: Option<f64>,
    pub oracle_residual: Option<f64>,
    pub status: RowStatus,
}

impl ResonanceRow {
    pub fn energy_rel_err(&self) -> Option<f64> {
        let exact = self.energy_exact?;
        Some((self.energy_var - exact).abs() / exact.abs().max(f64::MIN_POSITIVE))
    }

    pub fn gamma_rel_err(&self) -> Option<f64> {
        let exact = self.gamma_exact?;
        let var = self.gamma_var?;
        Some((var - exact).abs() / exact.abs().max(f64::MIN_POSITIVE))
    }
}

/// Wall-clock timings of the pipeline stages, seconds.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub assembly_s: f64,
    pub sweep_s: f64,
    pub localize_s: f64,
    pub oracle_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
    pub timings: Timings,
}

/// Everything a `run` produces besides the files themselves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub rows: Vec<ResonanceRow>,
    pub provenance: Provenance,
}

const RESONANCE_COLUMNS: &str = "n0,lambda_star,do_min,energy_var,boundary_density,gamma_var,energy_exact,gamma_exact,energy_rel_err,gamma_rel_err,oracle_residual,status";

pub fn render_resonances_csv(rows: &[ResonanceRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: {RESONANCES_SCHEMA}");
    let _ = writeln!(out, "{RESONANCE_COLUMNS}");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n0,
            fmt_f64(r.lambda_star),
            fmt_f64(r.do_min),
            fmt_f64(r.energy_var),
            fmt_f64(r.boundary_density),
            fmt_opt(r.gamma_var),
            fmt_opt(r.energy_exact),
            fmt_opt(r.gamma_exact),
            fmt_opt(r.energy_rel_err()),
            fmt_opt(r.gamma_rel_err()),
            fmt_opt(r.oracle_residual),
            r.status.encode()
        );
    }
    out
}

pub fn write_resonances_csv(path: &Path, rows: &[ResonanceRow]) -> Result<(), ReportError> {
    write_text(path, &render_resonances_csv(rows))
}

pub fn read_resonances_csv(path: &Path) -> Result<Vec<ResonanceRow>, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let err = |line: usize, reason: String| ReportError::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line != RESONANCE_COLUMNS {
                return Err(err(lineno, format!("unexpected header {line:?}")));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(err(lineno, format!("expected 12 fields, got {}", fields.len())));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64, ReportError> {
            s.parse::<f64>()
                .map_err(|e| err(lineno, format!("bad {what} {s:?}: {e}")))
        };
        let parse_opt = |s: &str, what: &str| -> Result<Option<f64>, ReportError> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_f(s, what).map(Some)
            }
        };
        rows.push(ResonanceRow {
            n0: fields[0]
                .parse()
                .map_err(|e| err(lineno, format!("bad n0 {:?}: {e}", fields[0])))?,
            lambda_star: parse_f(fields[1], "lambda_star")?,
            do_min: parse_f(fields[2], "do_min")?,
            energy_var: parse_f(fields[3], "energy_var")?,
            boundary_density: parse_f(fields[4], "boundary_density")?,
            gamma_var: parse_opt(fields[5], "gamma_var")?,
            energy_exact: parse_opt(fields[6], "energy_exact")?,
            gamma_exact: parse_opt(fields[7], "gamma_exact")?,
            // rel-err columns are derived; ignored on read
            oracle_residual: parse_opt(fields[10], "oracle_residual")?,
            status: RowStatus::decode(fields[11]).map_err(|reason| err(lineno, reason))?,
        });
    }
    if !saw_header {
        return Err(err(0, "missing header row".to_string()));
    }
    Ok(rows)
}

/// `lambda` against the lowest `levels` eigenvalues per grid point.
pub fn render_spectrum_csv(grid: &[f64], eigenvalues: &[Vec<f64>], levels: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: {SPECTRUM_SCHEMA}");
    let mut header = String::from("lambda");
    for n in 1..=levels {
        let _ = write!(header, ",E_{n}");
    }
    let _ = writeln!(out, "{header}");
    for (lambda, vals) in grid.iter().zip(eigenvalues) {
        let mut line = fmt_f64(*lambda);
        for v in vals.iter().take(levels) {
            line.push(',');
            line.push_str(&fmt_f64(*v));
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

/// `lambda` against `D_n` for every band label, sampled on the window grid.
pub fn render_do_curves_csv(lambdas: &[f64], band: &[usize], curves: &[Vec<f64>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: {DO_CURVES_SCHEMA}");
    let mut header = String::from("lambda");
    for n in band {
        let _ = write!(header, ",D_{n}");
    }
    let _ = writeln!(out, "{header}");
    for (i, lambda) in lambdas.iter().enumerate() {
        let mut line = fmt_f64(*lambda);
        for curve in curves {
            line.push(',');
            line.push_str(&fmt_f64(curve[i]));
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

/// Radial density profile of one resonance: variational against exact.
pub fn render_density_csv(radii: &[f64], var: &[f64], exact: Option<&[f64]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: {DENSITY_SCHEMA}");
    let _ = writeln!(out, "r,density_var,density_exact");
    for (i, r) in radii.iter().enumerate() {
        let ex = exact.map(|e| fmt_f64(e[i])).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", fmt_f64(*r), fmt_f64(var[i]), ex);
    }
    out
}

/// Row-major dump of one matrix with a documented header.
pub fn render_matrix_csv(name: &str, n: usize, beta: f64, l: u32, data: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: {MATRIX_SCHEMA}");
    let _ = writeln!(out, "# name: {name}, n: {n}, beta: {}, l: {l}, layout: row-major, one matrix row per line", fmt_f64(beta));
    for row in data.chunks(n) {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<(), ReportError> {
    std::fs::write(path, text).map_err(|source| ReportError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Space-separated twin of a CSV body for gnuplot.
pub fn csv_to_dat(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            if line.starts_with('#') {
                line.to_string()
            } else {
                line.replace(',', " ")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

/// Per-row verdict of a tolerance comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictRow {
    pub n0: usize,
    pub lambda_star: f64,
    pub energy_rel_err: Option<f64>,
    pub gamma_rel_err: Option<f64>,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub schema: String,
    pub tol_gamma: f64,
    pub tol_energy: f64,
    pub rows: Vec<VerdictRow>,
    pub checked: usize,
    pub failed: usize,
    pub vacuous: bool,
    pub passed: bool,
}

/// Checks every row carrying oracle data against relative tolerances.
/// Rows without oracle data are reported but never fail the verdict; an
/// empty report passes vacuously.
pub fn compare(rows: &[ResonanceRow], tol_gamma: f64, tol_energy: f64) -> Verdict {
    let mut out_rows = Vec::with_capacity(rows.len());
    let mut checked = 0;
    let mut failed = 0;
    for r in rows {
        let (pass, note) = match (&r.status, r.energy_rel_err(), r.gamma_rel_err()) {
            (RowStatus::Ok, Some(ee), Some(ge)) => {
                checked += 1;
                if ee <= tol_energy && ge <= tol_gamma {
                    (true, String::new())
                } else {
                    failed += 1;
                    let mut note = String::new();
                    if ee > tol_energy {
                        let _ = write!(note, "energy_rel_err {ee:.3e} > {tol_energy:.3e}; ");
                    }
                    if ge > tol_gamma {
                        let _ = write!(note, "gamma_rel_err {ge:.3e} > {tol_gamma:.3e}; ");
                    }
                    (false, note.trim_end().to_string())
                }
            }
            (status, _, _) => (true, format!("skipped: {}", status.encode())),
        };
        out_rows.push(VerdictRow {
            n0: r.n0,
            lambda_star: r.lambda_star,
            energy_rel_err: r.energy_rel_err(),
            gamma_rel_err: r.gamma_rel_err(),
            pass,
            note,
        });
    }
    Verdict {
        schema: VERDICT_SCHEMA.to_string(),
        tol_gamma,
        tol_energy,
        rows: out_rows,
        checked,
        failed,
        vacuous: checked == 0,
        passed: failed == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<ResonanceRow> {
        vec![
            ResonanceRow {
                n0: 4,
                lambda_star: 0.3725,
                do_min: 0.021,
                energy_var: 0.379,
                boundary_density: 0.141,
                gamma_var: Some(0.0731),
                energy_exact: Some(0.3788),
                gamma_exact: Some(0.0735),
                oracle_residual: Some(3.2e-13),
                status: RowStatus::Ok,
            },
            ResonanceRow {
                n0: 5,
                lambda_star: 0.51,
                do_min: 0.3,
                energy_var: 0.41,
                boundary_density: 0.09,
                gamma_var: None,
                energy_exact: None,
                gamma_exact: None,
                oracle_residual: None,
                status: RowStatus::WidthError("below threshold, radicand -1e-3".to_string()),
            },
        ]
    }

    #[test]
    fn resonance_csv_roundtrip() {
        let rows = sample_rows();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("resonances.csv");
        write_resonances_csv(&path, &rows).unwrap();
        let back = read_resonances_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].n0, 4);
        assert_eq!(back[0].lambda_star, rows[0].lambda_star);
        assert_eq!(back[0].gamma_exact, rows[0].gamma_exact);
        assert_eq!(back[1].status, rows[1].status);
    }

    #[test]
    fn rendering_is_deterministic_and_lossless() {
        let rows = sample_rows();
        assert_eq!(render_resonances_csv(&rows), render_resonances_csv(&rows));
        let x = 0.1 + 0.2;
        let parsed: f64 = fmt_f64(x).parse().unwrap();
        assert_eq!(parsed, x);
    }

    #[test]
    fn compare_tolerances() {
        let rows = sample_rows();
        let verdict = compare(&rows, 0.05, 1e-2);
        assert!(verdict.passed && !verdict.vacuous);
        assert_eq!(verdict.checked, 1);

        let strict = compare(&rows, 1e-4, 1e-2);
        assert!(!strict.passed);
        assert_eq!(strict.failed, 1);
        assert!(strict.rows[0].note.contains("gamma_rel_err"));

        let empty = compare(&[], 0.05, 1e-3);
        assert!(empty.passed && empty.vacuous);
    }

    #[test]
    fn dat_twin_replaces_commas_outside_comments() {
        let csv = "# schema: x\na,b\n1,2\n";
        assert_eq!(csv_to_dat(csv), "# schema: x\na b\n1 2\n");
    }

    #[test]
    fn parse_errors_carry_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, format!("{RESONANCE_COLUMNS}\n1,2\n")).unwrap();
        let err = read_resonances_csv(&path).unwrap_err();
        assert!(matches!(err, ReportError::Parse { line: 2, .. }), "{err}");
    }
}
