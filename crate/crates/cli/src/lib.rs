//! Scenario runner behind the `qbench` command.
//!
//! A run resolves parameters (defaults, then a TOML file, then `key=value`
//! overrides), refuses to start if any diagnostic is an error, and writes one
//! CSV per table plus a `manifest.json` with SHA-256 digests.

pub mod config;
pub mod scenarios;
pub mod table;

use std::path::PathBuf;

use config::{resolve, Diagnostic, Params, ScenarioConfig, Severity};
use scenarios::{Outcome, Scenario, Status};
use table::{sha256_hex, FileDigest, RunManifest, MANIFEST_NAME};

pub const DEFAULT_SEED: u64 = 42;
/// Overrides the default output root.
pub const OUT_ENV: &str = "QBENCH_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown scenario {0:?}; see `qbench list`")]
    UnknownScenario(String),
    #[error("invalid parameters:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Core(#[from] qbench_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn lookup(config: &ScenarioConfig) -> Result<&'static Scenario, CliError> {
    scenarios::find(&config.scenario).ok_or_else(|| CliError::UnknownScenario(config.scenario.clone()))
}

/// Resolved parameters and every diagnostic, including cross-parameter checks.
pub fn validate_config(config: &ScenarioConfig) -> Result<(Params, Vec<Diagnostic>), CliError> {
    let scenario = lookup(config)?;
    let (params, mut diagnostics) = resolve(&(scenario.params)(), config);
    if diagnostics.iter().all(|d| d.severity != Severity::Error) {
        diagnostics.extend((scenario.check)(&params));
    }
    Ok((params, diagnostics))
}

/// Runs without touching the filesystem.
pub fn evaluate(config: &ScenarioConfig) -> Result<(Params, Outcome), CliError> {
    let scenario = lookup(config)?;
    let (params, diagnostics) = validate_config(config)?;
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(CliError::Invalid(diagnostics));
    }
    let outcome = (scenario.run)(&params, config.seed.unwrap_or(DEFAULT_SEED))?;
    Ok((params, outcome))
}

pub fn output_dir(config: &ScenarioConfig) -> PathBuf {
    config.out.clone().unwrap_or_else(|| {
        let root = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("qbench-out"), PathBuf::from);
        root.join(&config.scenario)
    })
}

#[derive(Debug)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub dir: PathBuf,
    pub outcome: Outcome,
}

/// Evaluates the scenario and writes its tables and manifest.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    let (params, outcome) = evaluate(config)?;
    let seed = config.seed.unwrap_or(DEFAULT_SEED);
    let dir = output_dir(config);
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for t in &outcome.tables {
        let text = t.render(&config.scenario, seed, &params);
        std::fs::write(dir.join(&t.file_name), &text)?;
        files.push(FileDigest { name: t.file_name.clone(), bytes: text.len(), sha256: sha256_hex(text.as_bytes()) });
    }
    let manifest = RunManifest {
        scenario: config.scenario.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        status: outcome.status.as_str().to_string(),
        parameters: params,
        files,
    };
    std::fs::write(dir.join(MANIFEST_NAME), manifest.to_json())?;
    Ok(RunReport { manifest, dir, outcome })
}

/// Process exit code for a finished run.
pub fn exit_code(status: Status) -> u8 {
    match status {
        Status::Ok => 0,
        Status::Inconclusive => 3,
    }
}
