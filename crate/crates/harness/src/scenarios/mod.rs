pub mod classical;
pub mod coeffs;
pub mod compare;
pub mod simulate;
pub mod thermalize;
pub mod validate;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{parse, Scenario};
use crate::error::{HarnessError, HarnessResult};
use crate::output::Output;

/// What a scenario hands back for the summary sidecar.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub results: Value,
    pub violations: Vec<String>,
}

impl Report {
    pub fn new(results: Value) -> Self {
        Report { results, violations: Vec::new() }
    }

    pub fn violate(&mut self, msg: String) {
        self.violations.push(msg);
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum ScenarioConfig {
    Coeffs(coeffs::CoeffsConfig),
    Simulate(simulate::SimulateConfig),
    Compare(compare::CompareConfig),
    Thermalize(thermalize::ThermalizeConfig),
    Classical(classical::ClassicalConfig),
    Validate(validate::ValidateConfig),
}

impl ScenarioConfig {
    pub fn load(kind: Scenario, text: &str) -> HarnessResult<Self> {
        Ok(match kind {
            Scenario::Coeffs => ScenarioConfig::Coeffs(parse(text)?),
            Scenario::Simulate => ScenarioConfig::Simulate(parse(text)?),
            Scenario::Compare => ScenarioConfig::Compare(parse(text)?),
            Scenario::Thermalize => ScenarioConfig::Thermalize(parse(text)?),
            Scenario::Classical => ScenarioConfig::Classical(parse(text)?),
            Scenario::Validate => ScenarioConfig::Validate(parse(text)?),
        })
    }

    pub fn kind(&self) -> Scenario {
        match self {
            ScenarioConfig::Coeffs(_) => Scenario::Coeffs,
            ScenarioConfig::Simulate(_) => Scenario::Simulate,
            ScenarioConfig::Compare(_) => Scenario::Compare,
            ScenarioConfig::Thermalize(_) => Scenario::Thermalize,
            ScenarioConfig::Classical(_) => Scenario::Classical,
            ScenarioConfig::Validate(_) => Scenario::Validate,
        }
    }

    /// Seed the scenario consumes, if any.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ScenarioConfig::Compare(c) => c.setup.correlated.map(|s| s.seed),
            ScenarioConfig::Classical(c) => Some(c.run.seed),
            ScenarioConfig::Validate(c) => Some(c.seed),
            _ => None,
        }
    }

    pub fn override_seed(&mut self, seed: u64) {
        match self {
            ScenarioConfig::Compare(c) => {
                if let Some(s) = c.setup.correlated.as_mut() {
                    s.seed = seed;
                }
            }
            ScenarioConfig::Classical(c) => c.run.seed = seed,
            ScenarioConfig::Validate(c) => c.seed = seed,
            _ => {}
        }
    }

    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("configs serialize to plain JSON")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Versions {
    pub openbath: String,
    pub openbath_core: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: Scenario,
    pub versions: Versions,
    pub seed: Option<u64>,
    pub config: Value,
    pub outputs: Vec<String>,
    pub results: Value,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
}

/// Parse, run, and write data files plus `summary.json`; invariant violations surface after everything is written.
pub fn run_scenario(kind: Scenario, config_text: &str, opts: &RunOptions) -> HarnessResult<Summary> {
    let mut cfg = ScenarioConfig::load(kind, config_text)?;
    if let Some(s) = opts.seed {
        cfg.override_seed(s);
    }
    let echo = cfg.echo();
    let reparsed = ScenarioConfig::load(kind, &echo.to_string())
        .map_err(|e| HarnessError::Numerical(format!("config echo does not re-validate: {e}")))?;
    if reparsed.echo() != echo {
        return Err(HarnessError::Numerical("config echo does not round-trip".into()));
    }
    let mut out = Output::new(&opts.out)?;
    let report = match &cfg {
        ScenarioConfig::Coeffs(c) => coeffs::run(c, &mut out),
        ScenarioConfig::Simulate(c) => simulate::run(c, &mut out),
        ScenarioConfig::Compare(c) => compare::run(c, &mut out),
        ScenarioConfig::Thermalize(c) => thermalize::run(c, &mut out),
        ScenarioConfig::Classical(c) => classical::run(c, &mut out),
        ScenarioConfig::Validate(c) => validate::run(c, &mut out),
    }?;
    let summary = Summary {
        scenario: cfg.kind(),
        versions: Versions {
            openbath: env!("CARGO_PKG_VERSION").to_string(),
            openbath_core: openbath_core::VERSION.to_string(),
        },
        seed: cfg.seed(),
        config: echo,
        outputs: out.files().to_vec(),
        results: report.results,
        violations: report.violations.clone(),
    };
    out.json("summary.json", &summary)?;
    if !report.violations.is_empty() {
        return Err(HarnessError::Numerical(report.violations.join("; ")));
    }
    Ok(summary)
}
