use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::build::insights::InsightConfig;
use crate::error::{Error, Result};
use crate::gen::corpus::GenConfig;
use crate::parse::ParserConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    /// Generated charts, annotations and truth graphs.
    pub corpus: PathBuf,
    /// Parse results, built graphs, index and reports.
    pub out: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            corpus: PathBuf::from("corpus"),
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub qa_seed: u64,
    pub query_seed: u64,
    pub query_count: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            qa_seed: 2024,
            query_seed: 17,
            query_count: 50,
        }
    }
}

/// Run configuration. Unknown keys are rejected at every level.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub gen: GenConfig,
    pub parser: ParserConfig,
    pub insight: InsightConfig,
    pub paths: PathsConfig,
    pub eval: EvalConfig,
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.gen.validate()?;
        self.insight.validate()?;
        if self.eval.query_count == 0 {
            return Err(Error::Config("eval.query_count must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&serde_json::to_value(self)?)?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::default();
        assert_eq!(Config::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
        assert_eq!(Config::from_json("{}").unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            Config::from_json(r#"{"gen":{"count":3}}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            Config::from_json(r#"{"extra":1}"#),
            Err(Error::Config(_))
        ));
        assert!(Config::from_json(r#"{"insight":{"trend_r":0.6}}"#).is_ok());
    }

    #[test]
    fn thresholds_must_be_positive() {
        assert!(Config::from_json(r#"{"insight":{"trend_r":0}}"#).is_err());
        assert!(Config::from_json(r#"{"gen":{"per_type_count":0}}"#).is_err());
    }
}
