//! Batch driver for the nsamg verification suites: configuration, report
//! format and suite runners behind the `nsamg` binary.

pub mod config;
pub mod report;
pub mod suites;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nsamg::probgen::{generate, mtx, ProblemFamily, ProblemSpec};

pub use config::{ExperimentConfig, Suite};
pub use report::{Record, Report, Status, Summary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numerics(#[from] nsamg::Error),
}

impl CliError {
    /// Configuration, I/O and generation problems all exit with 2; numerical
    /// check failures are reported through [`Report::exit_code`].
    pub fn exit_code(&self) -> u8 {
        2
    }
}

/// Run the configured suites (plus the `experiment` checks when a problem is
/// given) on a pool of `config.jobs` threads.
pub fn execute(command: &str, config: &ExperimentConfig) -> Result<Report, CliError> {
    config.validate()?;
    let start = Instant::now();
    let params = suites::Params::from(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let records = pool.install(|| {
        let mut records = Vec::new();
        for suite in Suite::expand(&config.suites) {
            log::info!("running suite {}", suite.name());
            records.extend(suites::run_suite(suite, &params));
        }
        records.extend(suites::experiment(&params));
        records
    });
    Ok(Report::new(
        command,
        config.parameters(),
        records,
        start.elapsed(),
    ))
}

/// Write the JSON report to `config.output` (stdout when absent) and the CSV
/// table to `config.csv` when requested.
pub fn write_outputs(report: &Report, config: &ExperimentConfig) -> Result<(), CliError> {
    match &config.output {
        Some(path) => fs::write(path, report.to_json())?,
        None => print!("{}", report.to_json()),
    }
    if let Some(path) = &config.csv {
        report.write_csv(path)?;
    }
    Ok(())
}

/// Paths written by [`generate_files`]: `A`, `B` and `M⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedFiles {
    pub a: PathBuf,
    pub b: PathBuf,
    pub minv: PathBuf,
}

/// `out.mtx` → `out.B.mtx`, `out.Minv.mtx`.
pub fn companion_paths(out: &Path) -> GeneratedFiles {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let dir = out.parent().unwrap_or_else(|| Path::new(""));
    GeneratedFiles {
        a: out.to_path_buf(),
        b: dir.join(format!("{stem}.B.mtx")),
        minv: dir.join(format!("{stem}.Minv.mtx")),
    }
}

/// Build a problem family from its name and a JSON object of parameters,
/// with the same field names as in a config file.
pub fn family_from_name(
    name: &str,
    params: serde_json::Map<String, serde_json::Value>,
) -> Result<ProblemFamily, CliError> {
    let mut obj = params;
    obj.insert("name".into(), serde_json::Value::String(name.to_string()));
    serde_json::from_value(serde_json::Value::Object(obj))
        .map_err(|e| CliError::Config(e.to_string()))
}

pub fn generate_files(spec: &ProblemSpec, out: &Path) -> Result<GeneratedFiles, CliError> {
    let p = generate::<f64>(spec)?;
    let files = companion_paths(out);
    mtx::write_matrix(&files.a, &p.a, false)?;
    mtx::write_matrix(&files.b, &p.b, true)?;
    mtx::write_matrix(&files.minv, &p.minv, false)?;
    Ok(files)
}
