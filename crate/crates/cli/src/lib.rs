//! Command-line front end for `memheat-core`: JSON-configured experiments with
//! CSV/JSON output, and the `verify` suites.

pub mod checks;
pub mod config;
pub mod experiments;
pub mod output;
pub mod verify;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use output::{write_atomic, OutputDir, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CHECKS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(memheat_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl From<memheat_core::Error> for CliError {
    fn from(e: memheat_core::Error) -> Self {
        match e {
            memheat_core::Error::Config(m) => CliError::Config(ConfigError::new("<derived>", m)),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_NUMERICAL,
            CliError::ChecksFailed(_) => EXIT_FAILED_CHECKS,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub experiment: &'static str,
    pub metrics: BTreeMap<String, f64>,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

/// Run one experiment, writing its files and `manifest.json` under `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentResult, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut dir = OutputDir::new(out)?;
    let report = experiments::execute(cfg, &mut dir)?;
    let mut result = ExperimentResult {
        experiment: cfg.experiment.name(),
        metrics: report.metrics,
        files: dir.files().to_vec(),
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings: report.warnings,
    };
    let manifest = dir.json("manifest.json", &serde_json::to_value(&result).expect("result serializes"))?;
    result.files.push(manifest);
    Ok(result)
}

pub fn run_file(path: &Path, out: Option<&Path>) -> Result<ExperimentResult, CliError> {
    let cfg = ExperimentConfig::load(path)?;
    let dir = out.map(Path::to_path_buf).or_else(|| cfg.output_dir.clone()).unwrap_or_else(default_out);
    run(&cfg, &dir)
}

pub fn default_out() -> PathBuf {
    PathBuf::from("memheat-out")
}
