//! JSON run configuration.
//!
//! Every section is optional and falls back to the built-in defaults, so
//! `{}` is a complete configuration. Unknown keys are rejected. Example:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "generator": { "x_d": 1.81, "t_ex": 0.05 },
//!   "network": { "line": { "r_e": 0.02, "x_e": 0.4 }, "load": { "g": 0.0, "b": 0.0 } },
//!   "controller": { "k_e": 10.0, "k_de": 200.0, "k_u": 0.05 },
//!   "tuner": { "alpha": 0.01, "beta": 0.001, "c1": 1.0, "c2": 2.5 },
//!   "scenario": {
//!     "duration": 80.0, "h": 0.001, "ts": 0.02, "model": "full", "adaptive": true,
//!     "events": [ { "time": 20.0, "kind": "reference_step", "magnitude": 0.05 } ]
//!   }
//! }
//! ```
//!
//! `"line": null` disconnects the infinite bus (open line); the local load
//! then forms the whole network.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{ensure, ValidationError};
use crate::fuzzy::FuzzyPIConfig;
use crate::machine::GeneratorParams;
use crate::network::{
    admittances_from_line_and_load, ComplexAdmittance, LineParams, NetworkAdmittance,
};
use crate::sim::ScenarioConfig;
use crate::tuner::TunerConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    /// Transmission line to the infinite bus; `None` leaves it open.
    pub line: Option<LineParams>,
    /// Local consumer at the generator terminals.
    pub load: ComplexAdmittance,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            line: Some(LineParams::default()),
            load: ComplexAdmittance::ZERO,
        }
    }
}

impl NetworkConfig {
    pub fn admittance(&self) -> NetworkAdmittance {
        let y_line = self
            .line
            .map_or(ComplexAdmittance::ZERO, |l| l.admittance());
        admittances_from_line_and_load(y_line, self.load)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema: u32,
    pub generator: GeneratorParams,
    pub network: NetworkConfig,
    pub controller: FuzzyPIConfig,
    pub tuner: TunerConfig,
    pub scenario: ScenarioConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: SCHEMA_VERSION,
            generator: GeneratorParams::default(),
            network: NetworkConfig::default(),
            controller: FuzzyPIConfig::default(),
            tuner: TunerConfig::default(),
            scenario: ScenarioConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        ensure(self.schema == SCHEMA_VERSION, "schema: version 1")?;
        self.generator.validate()?;
        if let Some(line) = &self.network.line {
            line.validate()?;
        }
        self.network.load.validate()?;
        self.controller.validate()?;
        self.tuner.validate()?;
        self.scenario.validate()
    }

    pub fn network_admittance(&self) -> NetworkAdmittance {
        self.network.admittance()
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| match e.classify() {
        // well-formed JSON that does not fit the schema (unknown key, wrong type)
        serde_json::error::Category::Data => {
            ConfigError::Validation(ValidationError(e.to_string()))
        }
        _ => ConfigError::Parse(e.to_string()),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn to_json(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("configuration always serializes")
}

pub fn save_config(cfg: &RunConfig, path: &Path) -> Result<(), ConfigError> {
    std::fs::write(path, to_json(cfg) + "\n").map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::ModelKind;
    use crate::sim::{study_scenario, EventKind};

    #[test]
    fn empty_object_is_all_defaults() {
        assert_eq!(parse_config("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn beta_above_alpha_is_rejected() {
        let err = parse_config(r#"{"tuner": {"alpha": 0.01, "beta": 0.02}}"#).unwrap_err();
        match err {
            ConfigError::Validation(v) => assert_eq!(v.0, "tuner: beta < alpha"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            parse_config(r#"{"tunr": {}}"#),
            Err(ConfigError::Validation(_))
        ));
        assert!(matches!(
            parse_config(r#"{"generator": {"xd": 1.0}}"#),
            Err(ConfigError::Validation(_))
        ));
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(
            parse_config("{\"schema\": "),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn wrong_schema_version() {
        let err = parse_config(r#"{"schema": 2}"#).unwrap_err();
        assert_eq!(err.to_string(), "invalid configuration: schema: version 1");
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg = parse_config(
            r#"{"generator": {"t_ex": 0.1}, "scenario": {"model": "reduced", "events": []}}"#,
        )
        .unwrap();
        assert_eq!(cfg.generator.t_ex, 0.1);
        assert_eq!(cfg.generator.x_d, 1.81);
        assert_eq!(cfg.scenario.model, ModelKind::Reduced);
        assert!(cfg.scenario.events.is_empty());
        assert_eq!(cfg.scenario.duration, 80.0);
    }

    #[test]
    fn open_line() {
        let cfg = parse_config(r#"{"network": {"line": null}}"#).unwrap();
        assert_eq!(cfg.network_admittance(), NetworkAdmittance::OPEN);
    }

    #[test]
    fn save_load_round_trip() {
        let text = r#"{
            "network": {"load": {"g": 0.1, "b": -0.05}},
            "controller": {"k_u": 0.04, "rules": [[0,0,0,1,2],[0,0,1,2,3],[0,1,2,3,4],[1,2,3,4,4],[2,3,4,4,4]]},
            "scenario": {"adaptive": false, "fixed_c": 1.7,
                         "events": [{"time": 3.0, "kind": "transfer_susceptance_step", "magnitude": -0.3}]}
        }"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(
            cfg.scenario.events[0].kind,
            EventKind::TransferSusceptanceStep
        );
        let again = parse_config(&to_json(&cfg)).unwrap();
        assert_eq!(again, cfg);

        let study = RunConfig {
            scenario: study_scenario(),
            ..RunConfig::default()
        };
        assert_eq!(parse_config(&to_json(&study)).unwrap(), study);
    }
}
