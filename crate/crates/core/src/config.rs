//! Experiment configuration: one TOML file with nested sections.
//!
//! ```toml
//! l = 0
//!
//! [potential]
//! v0 = 0.15
//! delta = 5.0
//! r0 = 6.0
//! lambda_min = 0.05
//! lambda_max = 1.0
//! lambda_points = 191
//!
//! [basis]
//! n = 100
//! beta = 1.0
//!
//! [do]
//! band = [2, 30]
//! threshold = 0.5
//! # window = [0.05, 1.0]   # defaults to the full sweep range
//!
//! [outputs]
//! directory = "out"
//! tables = ["spectrum", "do_curves", "resonances"]
//!
//! [oracle]
//! enabled = true
//! tolerance = 1e-12
//! ```
//!
//! The environment variable `SIEGERT_OUTPUT_DIR`, when set, overrides the
//! output directory; nothing else is read from the environment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potentials::WellBarrierTemplate;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {reason}")]
    Invalid { reason: String },
}

fn invalid(reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Angular momentum of the block to diagonalize.
    pub l: u32,
    pub potential: PotentialSection,
    pub basis: BasisSection,
    #[serde(rename = "do", default)]
    pub do_settings: DoSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub oracle: OracleSection,
    /// SHA-256 of the raw config file, filled when loaded from a path.
    #[serde(skip)]
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub v0: f64,
    pub delta: f64,
    pub r0: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub n: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoSection {
    /// Window `[lambda_L, lambda_R]` in sweep-parameter values; endpoints are
    /// snapped to grid points. Defaults to the full sweep range.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// DO minima above this depth are not reported as resonances.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Inclusive 1-based band of eigenvalue labels to analyze.
    #[serde(default = "default_band")]
    pub band: [usize; 2],
}

fn default_threshold() -> f64 {
    0.5
}

fn default_band() -> [usize; 2] {
    [2, 30]
}

impl Default for DoSection {
    fn default() -> Self {
        Self {
            window: None,
            threshold: default_threshold(),
            band: default_band(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Table {
    Spectrum,
    DoCurves,
    Resonances,
    Density,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_tables")]
    pub tables: Vec<Table>,
    /// Additionally emit gnuplot-friendly space-separated `.dat` twins.
    #[serde(default)]
    pub gnuplot: bool,
    /// Number of eigenvalue columns in the spectrum table; defaults to one
    /// past the top of the band so avoided crossings are visible.
    #[serde(default)]
    pub spectrum_levels: Option<usize>,
    /// Radial extent and sampling of the optional density table.
    #[serde(default = "default_density_r_max")]
    pub density_r_max: f64,
    #[serde(default = "default_density_points")]
    pub density_points: usize,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_tables() -> Vec<Table> {
    vec![Table::Spectrum, Table::DoCurves, Table::Resonances]
}

fn default_density_r_max() -> f64 {
    18.0
}

fn default_density_points() -> usize {
    600
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            tables: default_tables(),
            gnuplot: false,
            spectrum_levels: None,
            density_r_max: default_density_r_max(),
            density_points: default_density_points(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GuessStrategy {
    /// Seed the exact solver with `(E_var, -gamma_var/2)`.
    #[default]
    Variational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub guess: GuessStrategy,
}

fn default_true() -> bool {
    true
}

fn default_oracle_tolerance() -> f64 {
    1e-12
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            enabled: true,
            tolerance: default_oracle_tolerance(),
            guess: GuessStrategy::Variational,
        }
    }
}

impl ExperimentConfig {
    /// Loads, validates, and applies the output-directory environment
    /// override. The SHA-256 of the file contents is recorded for
    /// provenance.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let text = String::from_utf8_lossy(&raw);
        let mut config: Self = toml::from_str(&text)?;
        config.config_hash = Some(sha256_hex(&raw));
        if let Ok(dir) = std::env::var("SIEGERT_OUTPUT_DIR") {
            if !dir.is_empty() {
                config.outputs.directory = PathBuf::from(dir);
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Parses and validates without touching the filesystem or environment.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let mut config: Self = toml::from_str(text)?;
        config.config_hash = Some(sha256_hex(text.as_bytes()));
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.potential;
        if !(p.v0 >= 0.0 && p.delta > 0.0 && p.r0 > p.delta) {
            return Err(invalid(format!(
                "potential: need v0 >= 0 and 0 < delta < r0, got v0 = {}, delta = {}, r0 = {}",
                p.v0, p.delta, p.r0
            )));
        }
        if !(p.lambda_min >= 0.0 && p.lambda_max > p.lambda_min) {
            return Err(invalid(format!(
                "potential: need 0 <= lambda_min < lambda_max, got [{}, {}]",
                p.lambda_min, p.lambda_max
            )));
        }
        if p.lambda_points < 3 {
            return Err(invalid(format!(
                "potential.lambda_points = {} must be at least 3",
                p.lambda_points
            )));
        }
        if self.basis.n < 10 {
            return Err(invalid(format!(
                "basis.n = {} must be at least 10",
                self.basis.n
            )));
        }
        if !(self.basis.beta > 0.0 && self.basis.beta.is_finite()) {
            return Err(invalid(format!(
                "basis.beta = {} must be positive",
                self.basis.beta
            )));
        }
        let [lo, hi] = self.do_settings.band;
        if lo < 1 || lo > hi || hi > self.basis.n {
            return Err(invalid(format!(
                "do.band = [{lo}, {hi}] must satisfy 1 <= lo <= hi <= n = {}",
                self.basis.n
            )));
        }
        if !(self.do_settings.threshold > 0.0 && self.do_settings.threshold < 2.0) {
            return Err(invalid(format!(
                "do.threshold = {} must be in (0, 2)",
                self.do_settings.threshold
            )));
        }
        if let Some([wl, wr]) = self.do_settings.window {
            if !(wl < wr && wl >= p.lambda_min - 1e-12 && wr <= p.lambda_max + 1e-12) {
                return Err(invalid(format!(
                    "do.window = [{wl}, {wr}] must be ordered and inside the sweep range [{}, {}]",
                    p.lambda_min, p.lambda_max
                )));
            }
        }
        if self.oracle.enabled && self.l > 1 {
            return Err(invalid(format!(
                "oracle comparison needs l <= 1 (closed-form exact solver); got l = {} — disable the oracle for higher partial waves",
                self.l
            )));
        }
        if !(self.oracle.tolerance > 0.0) {
            return Err(invalid("oracle.tolerance must be positive".to_string()));
        }
        if self.outputs.density_points < 2 || !(self.outputs.density_r_max > 0.0) {
            return Err(invalid(
                "outputs.density_points must be >= 2 and density_r_max > 0".to_string(),
            ));
        }
        Ok(())
    }

    pub fn template(&self) -> WellBarrierTemplate {
        WellBarrierTemplate {
            v0: self.potential.v0,
            delta: self.potential.delta,
            r0: self.potential.r0,
        }
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        let p = &self.potential;
        let k = p.lambda_points;
        (0..k)
            .map(|i| p.lambda_min + (p.lambda_max - p.lambda_min) * i as f64 / (k - 1) as f64)
            .collect()
    }

    /// Window endpoints snapped to the nearest grid indices.
    pub fn window_indices(&self, grid: &[f64]) -> (usize, usize) {
        match self.do_settings.window {
            None => (0, grid.len() - 1),
            Some([wl, wr]) => {
                let snap = |target: f64| {
                    grid.iter()
                        .enumerate()
                        .min_by(|(_, a), (_, b)| {
                            (*a - target)
                                .abs()
                                .partial_cmp(&(*b - target).abs())
                                .unwrap()
                        })
                        .map(|(i, _)| i)
                        .unwrap_or(0)
                };
                (snap(wl), snap(wr))
            }
        }
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
