//! Scenario runner and property suite behind the `qmeasure` binary.

pub mod presets;
pub mod report;
pub mod run;
pub mod scenario;
pub mod verify;

use std::path::Path;

use thiserror::Error;

use crate::error::Error;
pub use presets::{find_preset, list_presets};
pub use report::{OutputFormat, Report, ReportRow};
pub use run::run_scenario;
pub use scenario::{parse_scenario, ScenarioFile};
pub use verify::{verify, VerifyConfig, VerifySummary};

/// Seed used by `run` and `verify` when none is given.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(Error),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invariant violation: {name}: {0}", name = variant_name(.0))]
    Numeric(Error),
    #[error("invariant violation: {name}: {detail}")]
    Invariant { name: String, detail: String },
    #[error("property failure: {0}")]
    Property(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Property(_) => 1,
            CliError::Parse(_) | CliError::Io { .. } => 2,
            CliError::Numeric(_) | CliError::Invariant { .. } => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => CliError::Parse(e),
            other => CliError::Numeric(other),
        }
    }
}

fn variant_name(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "InvalidInput",
        Error::NotHermitian(_) => "NotHermitian",
        Error::NotUnitary(_) => "NotUnitary",
        Error::InvalidProjectorFamily(_) => "InvalidProjectorFamily",
        Error::ZeroProbabilityBranch { .. } => "ZeroProbabilityBranch",
        Error::InvalidDensity(_) => "InvalidDensity",
        Error::NotDecohered(_) => "NotDecohered",
        Error::Parse { .. } => "Parse",
    }
}

/// Reads a scenario from a file path, or from a built-in preset when no such
/// file exists and the name matches one. Returns the default report id too.
pub fn load_scenario(source: &str) -> Result<(String, ScenarioFile), CliError> {
    let path = Path::new(source);
    let (id, text) = if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: source.to_string(), message: e.to_string() })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(source);
        (stem.to_string(), text)
    } else if let Some(preset) = find_preset(source) {
        (preset.name.to_string(), preset.text.to_string())
    } else {
        return Err(CliError::Io {
            path: source.to_string(),
            message: "no such file or preset".into(),
        });
    };
    Ok((id, parse_scenario(&text)?))
}

/// `run <file|preset> --format …`: the rendered report.
pub fn run_command(source: &str, format: OutputFormat) -> Result<String, CliError> {
    let (id, file) = load_scenario(source)?;
    Ok(run_scenario(&file, &id)?.render(format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Property("x".into()).exit_code(), 1);
        assert_eq!(CliError::from(Error::Parse { line: 3, message: "bad".into() }).exit_code(), 2);
        let e = CliError::from(Error::InvalidProjectorFamily("overlap".into()));
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("InvalidProjectorFamily"));
    }

    #[test]
    fn every_preset_runs() {
        for p in presets::PRESETS {
            run_command(p.name, OutputFormat::Records).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn telepathy_presets_report_expected_gaps() {
        let born = run_command("telepathy_born", OutputFormat::Table).unwrap();
        let line = born.lines().find(|l| l.trim_start().starts_with("signaling_gap:")).unwrap();
        assert!(line.contains("signaling_gap: 0.000000"), "{line}");
        let nonborn = run_command("telepathy_nonborn", OutputFormat::Table).unwrap();
        assert!(nonborn.contains("signaling_gap: 0.1196"), "{nonborn}");
    }

    #[test]
    fn missing_source_is_an_io_error() {
        let e = load_scenario("/nonexistent/definitely_missing.scn").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
