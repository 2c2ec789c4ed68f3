//! Config-driven experiment runner: potential -> basis -> sweep -> DO ->
//! width -> oracle comparison, with CSV emission.

use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::basis::{assemble_factors, BasisError, LaguerreBasis};
use crate::config::{ExperimentConfig, Table};
use crate::exact::{find_resonance, ExactError, ExactResonance};
use crate::potentials::{well_barrier, PotentialError};
use crate::report::{
    self, Provenance, ReportError, ResonanceRow, RowStatus, RunReport, Timings, Verdict,
};
use crate::stabilization::{
    localize, sweep, DoWindow, LocalizeOptions, ResonanceEstimate, StabilizationError,
    VariationalSpectrum,
};
use crate::width::{gamma_general, gamma_p_wave, gamma_s_wave, WidthInput};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Stabilization(#[from] StabilizationError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("cannot create output directory {path}: {source}")]
    OutputDir {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Report plus the list of files the run emitted.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub files: Vec<PathBuf>,
}

fn extract_width(est: &ResonanceEstimate, r0: f64, l: u32) -> Result<f64, String> {
    let input = WidthInput {
        energy: est.energy,
        boundary_density: est.boundary_density,
        support_radius: r0,
        l,
    };
    let result = match l {
        0 => gamma_s_wave(&input),
        1 => gamma_p_wave(&input),
        _ => gamma_general(&input),
    };
    result.map_err(|e| e.to_string())
}

fn solve_oracle(
    config: &ExperimentConfig,
    est: &ResonanceEstimate,
    gamma_var: Option<f64>,
) -> Result<ExactResonance, ExactError> {
    let params = config.template().with_lambda(est.lambda_star);
    let potential = well_barrier(params).map_err(|_| ExactError::ZeroEnergy)?;
    // seed with the variational point (E_var, -gamma_var/2)
    let guess = Complex64::new(est.energy, -0.5 * gamma_var.unwrap_or(0.0));
    find_resonance(&potential, config.l, guess, config.oracle.tolerance)
}

/// Runs the full pipeline for one configuration and emits the configured
/// tables into the output directory. A failing resonance candidate is
/// recorded in its row, never fatal; infrastructure failures are.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, PipelineError> {
    let t_total = Instant::now();
    let l = config.l;

    let t_assembly = Instant::now();
    let basis = LaguerreBasis::new(config.basis.n, config.basis.beta, l)?;
    let factors = assemble_factors(&basis, config.template(), l)?;
    let assembly_s = t_assembly.elapsed().as_secs_f64();

    let grid = config.lambda_grid();
    let [band_lo, band_hi] = config.do_settings.band;
    let t_sweep = Instant::now();
    let spectrum = sweep(factors, &grid, band_hi)?;
    let sweep_s = t_sweep.elapsed().as_secs_f64();

    let (left, right) = config.window_indices(&grid);
    let window = DoWindow { left, right };
    let opts = LocalizeOptions {
        threshold: config.do_settings.threshold,
    };

    let t_localize = Instant::now();
    let per_n: Result<Vec<Vec<ResonanceEstimate>>, StabilizationError> = (band_lo..=band_hi)
        .into_par_iter()
        .map(|n| localize(&spectrum, n, window, opts))
        .collect();
    let mut estimates: Vec<ResonanceEstimate> = per_n?.into_iter().flatten().collect();
    estimates.sort_by(|a, b| {
        (a.n0, a.lambda_star)
            .partial_cmp(&(b.n0, b.lambda_star))
            .unwrap()
    });
    let localize_s = t_localize.elapsed().as_secs_f64();

    let r0 = config.potential.r0;
    let t_oracle = Instant::now();
    let rows: Vec<ResonanceRow> = estimates
        .par_iter()
        .map(|est| {
            let mut row = ResonanceRow {
                n0: est.n0,
                lambda_star: est.lambda_star,
                do_min: est.do_value,
                energy_var: est.energy,
                boundary_density: est.boundary_density,
                gamma_var: None,
                energy_exact: None,
                gamma_exact: None,
                oracle_residual: None,
                status: RowStatus::Ok,
            };
            match extract_width(est, r0, l) {
                Ok(gamma) => row.gamma_var = Some(gamma),
                Err(message) => {
                    row.status = RowStatus::WidthError(message);
                    return row;
                }
            }
            if !config.oracle.enabled {
                row.status = RowStatus::NoOracle;
                return row;
            }
            match solve_oracle(config, est, row.gamma_var) {
                Ok(exact) => {
                    row.energy_exact = Some(exact.energy.energy());
                    row.gamma_exact = Some(exact.energy.gamma());
                    row.oracle_residual = Some(exact.residual);
                }
                Err(err) => row.status = RowStatus::OracleError(err.to_string()),
            }
            row
        })
        .collect();
    let oracle_s = t_oracle.elapsed().as_secs_f64();

    let report = RunReport {
        rows,
        provenance: Provenance {
            config_hash: config.config_hash.clone().unwrap_or_default(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timings: Timings {
                assembly_s,
                sweep_s,
                localize_s,
                oracle_s,
                total_s: t_total.elapsed().as_secs_f64(),
            },
        },
    };

    let files = emit_outputs(config, &spectrum, window, &estimates, &report)?;
    Ok(RunOutcome { report, files })
}

fn emit_outputs(
    config: &ExperimentConfig,
    spectrum: &VariationalSpectrum,
    window: DoWindow,
    estimates: &[ResonanceEstimate],
    report: &RunReport,
) -> Result<Vec<PathBuf>, PipelineError> {
    let dir = &config.outputs.directory;
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::OutputDir {
        path: dir.clone(),
        source,
    })?;
    let mut files = Vec::new();
    let mut emit = |name: &str, text: &str, files: &mut Vec<PathBuf>| -> Result<(), PipelineError> {
        let path = dir.join(name);
        report::write_text(&path, text)?;
        files.push(path);
        if config.outputs.gnuplot && name.ends_with(".csv") {
            let dat = dir.join(name.replace(".csv", ".dat"));
            report::write_text(&dat, &report::csv_to_dat(text))?;
            files.push(dat);
        }
        Ok(())
    };

    let grid = spectrum.lambda_grid();
    let [band_lo, band_hi] = config.do_settings.band;
    for table in &config.outputs.tables {
        match table {
            Table::Spectrum => {
                let levels = config
                    .outputs
                    .spectrum_levels
                    .unwrap_or(band_hi + 1)
                    .min(spectrum.basis_size());
                let eigenvalues: Vec<Vec<f64>> = (0..grid.len())
                    .map(|i| spectrum.eigenvalues_at(i).to_vec())
                    .collect();
                let text = report::render_spectrum_csv(grid, &eigenvalues, levels);
                emit("spectrum.csv", &text, &mut files)?;
            }
            Table::DoCurves => {
                let band: Vec<usize> = (band_lo..=band_hi).collect();
                let curves: Result<Vec<Vec<f64>>, StabilizationError> = band
                    .par_iter()
                    .map(|&n| Ok(crate::stabilization::do_curve(spectrum, n, window)?.values))
                    .collect();
                let curves = curves?;
                let lambdas = &grid[window.left..=window.right];
                let text = report::render_do_curves_csv(lambdas, &band, &curves);
                emit("do_curves.csv", &text, &mut files)?;
            }
            Table::Resonances => {
                let text = report::render_resonances_csv(&report.rows);
                emit("resonances.csv", &text, &mut files)?;
            }
            Table::Density => {
                if let Some(text) = density_table(config, spectrum, estimates) {
                    emit("density.csv", &text, &mut files)?;
                }
            }
        }
    }

    let meta = serde_json::json!({
        "schema": "siegert-run-meta/v1",
        "provenance": report.provenance,
        "resonances": report.rows.len(),
    });
    let meta_path = dir.join("run_meta.json");
    report::write_text(
        &meta_path,
        &(serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"),
    )?;
    files.push(meta_path);
    Ok(files)
}

/// Radial density of the deepest DO minimum: variational profile, plus the
/// exact one when the oracle converges.
fn density_table(
    config: &ExperimentConfig,
    spectrum: &VariationalSpectrum,
    estimates: &[ResonanceEstimate],
) -> Option<String> {
    let best = estimates
        .iter()
        .min_by(|a, b| a.do_value.partial_cmp(&b.do_value).unwrap())?;
    let factors = spectrum.factors();
    let basis = factors.basis();
    let norm = factors.overlap_r0().quadratic_form(&best.coefficients);

    let k = config.outputs.density_points;
    let radii: Vec<f64> = (0..k)
        .map(|i| config.outputs.density_r_max * i as f64 / (k - 1) as f64)
        .collect();
    let mut phi = vec![0.0; basis.size()];
    let var: Vec<f64> = radii
        .iter()
        .map(|&r| {
            basis.eval_all(r, &mut phi);
            let psi: f64 = phi.iter().zip(&best.coefficients).map(|(p, c)| p * c).sum();
            psi * psi / norm
        })
        .collect();

    let exact = if config.oracle.enabled {
        let gamma_var = extract_width(best, config.potential.r0, config.l).ok();
        solve_oracle(config, best, gamma_var).ok().map(|res| {
            radii
                .iter()
                .map(|&r| res.wavefunction.eval(r).norm_sqr())
                .collect::<Vec<f64>>()
        })
    } else {
        None
    };
    Some(report::render_density_csv(&radii, &var, exact.as_deref()))
}

/// The `compare` subcommand: tolerance verdict over a resonances CSV.
pub fn compare_report(
    report_path: &std::path::Path,
    tol_gamma: f64,
    tol_energy: f64,
) -> Result<Verdict, ReportError> {
    let rows = report::read_resonances_csv(report_path)?;
    Ok(report::compare(&rows, tol_gamma, tol_energy))
}

/// The `dump-matrices` subcommand: writes `h0.csv` and `w.csv`.
pub fn dump_matrices(config: &ExperimentConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let basis = LaguerreBasis::new(config.basis.n, config.basis.beta, config.l)?;
    let factors = assemble_factors(&basis, config.template(), config.l)?;
    let dir = &config.outputs.directory;
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::OutputDir {
        path: dir.clone(),
        source,
    })?;
    let n = basis.size();
    let mut files = Vec::new();
    for (name, matrix) in [("h0", factors.h0()), ("w", factors.w())] {
        let text = report::render_matrix_csv(name, n, config.basis.beta, config.l, matrix.data());
        let path = dir.join(format!("{name}.csv"));
        report::write_text(&path, &text)?;
        files.push(path);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(dir: &std::path::Path) -> ExperimentConfig {
        let text = format!(
            r#"
l = 0

[potential]
v0 = 0.15
delta = 5.0
r0 = 6.0
lambda_min = 0.05
lambda_max = 1.0
lambda_points = 49

[basis]
n = 60

[do]
band = [2, 16]

[outputs]
directory = "{}"
tables = ["spectrum", "do_curves", "resonances", "density"]

[oracle]
enabled = true
"#,
            dir.display()
        );
        ExperimentConfig::from_toml_str(&text).unwrap()
    }

    #[test]
    fn run_emits_all_tables_and_finds_resonances() {
        let tmp = tempfile::tempdir().unwrap();
        let config = small_config(tmp.path());
        let outcome = run(&config).unwrap();

        for name in ["spectrum.csv", "do_curves.csv", "resonances.csv", "density.csv"] {
            assert!(
                outcome.files.iter().any(|f| f.ends_with(name)),
                "missing {name}"
            );
        }
        assert!(tmp.path().join("run_meta.json").exists());

        let ok_rows: Vec<_> = outcome
            .report
            .rows
            .iter()
            .filter(|r| r.status == RowStatus::Ok)
            .collect();
        assert!(!ok_rows.is_empty(), "no successful oracle rows");
        for row in &ok_rows {
            assert!(row.gamma_var.unwrap() >= 0.0);
            assert!(row.gamma_exact.unwrap() > 0.0);
        }
        // at least one row in the physical window agrees reasonably at N=60
        let good = ok_rows.iter().any(|r| {
            r.energy_var > 0.0
                && r.energy_var < r.lambda_star
                && r.gamma_rel_err().unwrap() < 0.5
        });
        assert!(good, "no physically sensible oracle agreement");
    }

    #[test]
    fn determinism_byte_identical_csv() {
        let tmp1 = tempfile::tempdir().unwrap();
        let tmp2 = tempfile::tempdir().unwrap();
        let c1 = small_config(tmp1.path());
        let c2 = small_config(tmp2.path());
        run(&c1).unwrap();
        run(&c2).unwrap();
        for name in ["spectrum.csv", "do_curves.csv", "resonances.csv", "density.csv"] {
            let a = std::fs::read(tmp1.path().join(name)).unwrap();
            let b = std::fs::read(tmp2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} not byte-identical");
        }
    }

    #[test]
    fn oracle_disabled_leaves_exact_columns_empty() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = small_config(tmp.path());
        config.oracle.enabled = false;
        config.outputs.tables = vec![Table::Resonances];
        let outcome = run(&config).unwrap();
        assert!(!outcome.report.rows.is_empty());
        for row in &outcome.report.rows {
            assert_eq!(row.status, RowStatus::NoOracle);
            assert!(row.energy_exact.is_none() && row.gamma_exact.is_none());
            assert!(row.gamma_var.is_some());
        }
    }

    #[test]
    fn dump_matrices_writes_both_factors() {
        let tmp = tempfile::tempdir().unwrap();
        let config = small_config(tmp.path());
        let files = dump_matrices(&config).unwrap();
        assert_eq!(files.len(), 2);
        let h0 = std::fs::read_to_string(tmp.path().join("h0.csv")).unwrap();
        assert!(h0.starts_with("# schema: siegert-matrix/v1"));
        assert_eq!(h0.lines().count(), 2 + config.basis.n);
    }

    #[test]
    fn scaling_covariance_of_the_full_pipeline() {
        // doubling beta while rescaling the potential (r -> r/2, V -> 4V)
        // multiplies all energies and widths by 4 and leaves gamma/E fixed
        let tmp1 = tempfile::tempdir().unwrap();
        let tmp2 = tempfile::tempdir().unwrap();

        let base = format!(
            r#"
l = 0

[potential]
v0 = 0.15
delta = 5.0
r0 = 6.0
lambda_min = 0.3
lambda_max = 0.7
lambda_points = 17

[basis]
n = 50

[do]
band = [2, 10]

[outputs]
directory = "{}"
tables = ["resonances"]

[oracle]
enabled = false
"#,
            tmp1.path().display()
        );
        let scaled = format!(
            r#"
l = 0

[potential]
v0 = 0.6
delta = 2.5
r0 = 3.0
lambda_min = 1.2
lambda_max = 2.8
lambda_points = 17

[basis]
n = 50
beta = 2.0

[outputs]
directory = "{}"
tables = ["resonances"]

[do]
band = [2, 10]

[oracle]
enabled = false
"#,
            tmp2.path().display()
        );
        let c1 = ExperimentConfig::from_toml_str(&base).unwrap();
        let c2 = ExperimentConfig::from_toml_str(&scaled).unwrap();
        let r1 = run(&c1).unwrap();
        let r2 = run(&c2).unwrap();

        assert_eq!(r1.report.rows.len(), r2.report.rows.len());
        let mut compared = 0;
        for (a, b) in r1.report.rows.iter().zip(&r2.report.rows) {
            assert_eq!(a.n0, b.n0);
            assert!((b.lambda_star - 4.0 * a.lambda_star).abs() < 1e-8);
            assert!((b.energy_var - 4.0 * a.energy_var).abs() < 1e-8);
            if let (Some(ga), Some(gb)) = (a.gamma_var, b.gamma_var) {
                if a.energy_var > 0.0 {
                    let ratio_a = ga / a.energy_var;
                    let ratio_b = gb / b.energy_var;
                    assert!(
                        (ratio_a - ratio_b).abs() < 1e-8 * ratio_a.abs().max(1e-8),
                        "gamma/E not scale invariant: {ratio_a} vs {ratio_b}"
                    );
                    compared += 1;
                }
            }
        }
        assert!(compared > 0, "no rows compared");
    }
}
