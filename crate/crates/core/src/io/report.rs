use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::harness::NamedFit;

/// Short commit hash of the source tree at build time, `"unknown"` outside
/// a git checkout, with a `-dirty` suffix for uncommitted changes.
pub fn build_id() -> &'static str {
    env!("ACMHD_BUILD_ID")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub build_id: String,
    pub command: String,
    /// Re-parseable configuration text.
    pub config: String,
    pub fits: Vec<NamedFit>,
    /// Command-specific payload.
    pub results: Value,
}

impl Report {
    pub fn new(command: &str, config: &str, fits: Vec<NamedFit>, results: Value) -> Self {
        Self {
            build_id: build_id().to_string(),
            command: command.to_string(),
            config: config.to_string(),
            fits,
            results,
        }
    }
}

pub fn write_report(path: &Path, report: &Report) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_config;

    #[test]
    fn config_echo_reparses() {
        let cfg = parse_config("n = 16\nepsilon = 0.01\nT = 0.5\n").unwrap();
        let r = Report::new("run", &cfg.to_string(), vec![], Value::Null);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_report(&path, &r).unwrap();
        let back: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(parse_config(&back.config).unwrap(), cfg);
        assert!(!back.build_id.is_empty());
    }
}
