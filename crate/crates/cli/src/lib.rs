//! Config-driven driver: optimize or load a pulse, encode, decode, and write
//! mechanism tables, plots and summaries.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

use std::path::{Path, PathBuf};

pub use config::RunConfig;
pub use error::CliError;
pub use output::RunSummary;
pub use pipeline::{analyze, prepare, verify, Analysis, Prepared, VerifyOutcome};

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub floor: Option<f64>,
}

fn load(path: &Path, overrides: &Overrides) -> Result<(RunConfig, PathBuf), CliError> {
    let mut config = RunConfig::load(path)?;
    if let Some(floor) = overrides.floor {
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(CliError::Config(format!("floor must be a non-negative number, got {floor}")));
        }
        config.floor = floor;
    }
    let out = overrides.out.clone().unwrap_or_else(|| config.output_dir());
    Ok((config, out))
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or_else(|| Path::new("."))
}

/// Full analysis of one config. Artifacts are written even when an internal
/// identity fails, and the failure is then reported as an error.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<(RunSummary, PathBuf), CliError> {
    let (config, out) = load(path, overrides)?;
    let prepared = prepare(&config, base_dir(path))?;
    let analysis = analyze(&config, &prepared)?;
    let files = output::run_artifacts(&config, &prepared, &analysis)?;
    output::write_all(&out, &files)?;
    if !analysis.checks.violations.is_empty() {
        return Err(CliError::Invariant(analysis.checks.violations.clone()));
    }
    Ok((output::summarize(&config, &prepared, &analysis), out))
}

/// Oracle comparison of one config.
pub fn verify_file(path: &Path, overrides: &Overrides) -> Result<(VerifyOutcome, PathBuf), CliError> {
    let (config, out) = load(path, overrides)?;
    let prepared = prepare(&config, base_dir(path))?;
    let outcome = verify(&config, &prepared)?;
    output::write_all(&out, &output::verify_artifacts(&outcome)?)?;
    if !outcome.pass {
        return Err(CliError::Invariant(vec![format!(
            "oracle gap {:e} exceeds tolerance {:e}",
            outcome.coarse.max_gap, outcome.tolerance
        )]));
    }
    Ok((outcome, out))
}
