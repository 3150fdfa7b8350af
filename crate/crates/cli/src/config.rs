//! JSON run configuration.
//!
//! ```json
//! {
//!   "r": 0.02, "b": 0.04, "mu": 0.06, "sigma": 0.2, "lambda": 0.04,
//!   "consumption": { "type": "constant", "c": 1.0 },
//!   "regime": "borrow",
//!   "simulation": { "n_paths": 100000, "dt": 0.004, "seed": 7, "w_start": 10.0 }
//! }
//! ```
//!
//! `b` defaults to `r`; `regime` may also be given on the command line.

use std::path::{Path, PathBuf};

use ruin_core::simulator::SimConfig;
use ruin_core::{validate, ConsumptionSpec, MarketParams, Model, Regime};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub consumption: ConsumptionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSection {
    #[serde(flatten)]
    pub config: SimConfig,
    /// A `solve` report whose sampled strategy replaces the optimal one.
    /// Relative paths resolve against the configuration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        if let Some(sim) = config.simulation.as_mut() {
            if let Some(s) = sim.strategy.as_mut() {
                if s.is_relative() {
                    *s = path.parent().unwrap_or(Path::new(".")).join(&*s);
                }
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid configuration JSON: {e}")))
    }

    pub fn params(&self) -> MarketParams {
        MarketParams::new(
            self.r,
            self.b.unwrap_or(self.r),
            self.mu,
            self.sigma,
            self.lambda,
        )
    }

    /// Regime from the command line, else from the file.
    pub fn regime(&self, flag: Option<Regime>) -> CliResult<Regime> {
        if let Some(r) = flag {
            return Ok(r);
        }
        match &self.regime {
            Some(s) => s.parse().map_err(CliError::from),
            None => Err(CliError::Config(
                "no regime given; set \"regime\" or pass --regime".into(),
            )),
        }
    }

    pub fn model(&self, regime: Regime) -> CliResult<Model> {
        Ok(validate(self.params(), self.consumption, regime)?)
    }

    /// Constant consumption rate, required by the figures.
    pub fn constant_rate(&self) -> CliResult<f64> {
        match self.consumption {
            ConsumptionSpec::Constant { c } => Ok(c),
            ConsumptionSpec::Proportional { .. } => {
                Err(CliError::Config("figures need constant consumption".into()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"r":0.02,"b":0.04,"mu":0.06,"sigma":0.2,"lambda":0.04,
        "consumption":{"type":"constant","c":1.0},"regime":"no-borrow"}"#;

    #[test]
    fn parses_and_validates() {
        let c = Config::parse(BASE).unwrap();
        assert_eq!(c.regime(None).unwrap(), Regime::NoBorrow);
        assert_eq!(c.regime(Some(Regime::Borrow)).unwrap(), Regime::Borrow);
        assert!(c.model(Regime::Borrow).is_ok());
    }

    #[test]
    fn b_defaults_to_r() {
        let c = Config::parse(&BASE.replace(r#""b":0.04,"#, "")).unwrap();
        assert_eq!(c.params().b, 0.02);
        assert!(matches!(c.model(Regime::Borrow), Err(CliError::Config(_))));
        assert!(c.model(Regime::Unconstrained).is_ok());
    }

    #[test]
    fn errors_are_config_errors_with_position() {
        let err = Config::parse("{\"r\": 0.02,\n \"mu\": }").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(Config::parse(&BASE.replace("\"mu\"", "\"mew\"")).is_err());
        let bad = Config::parse(&BASE.replace("no-borrow", "sideways")).unwrap();
        assert!(bad.regime(None).is_err());
    }

    #[test]
    fn simulation_block() {
        let text = BASE.replace(
            r#""regime":"no-borrow""#,
            r#""regime":"borrow","simulation":{"n_paths":10,"dt":0.01,"seed":3,"w_start":5,"strategy":"s.json"}"#,
        );
        let c = Config::parse(&text).unwrap();
        let sim = c.simulation.unwrap();
        assert_eq!(sim.config.n_paths, 10);
        assert!(sim.config.bridge_correction);
        assert_eq!(sim.strategy.unwrap(), PathBuf::from("s.json"));
    }
}
