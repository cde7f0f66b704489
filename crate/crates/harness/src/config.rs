use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Coeffs,
    Simulate,
    Compare,
    Thermalize,
    Classical,
    Validate,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Coeffs => "coeffs",
            Scenario::Simulate => "simulate",
            Scenario::Compare => "compare",
            Scenario::Thermalize => "thermalize",
            Scenario::Classical => "classical",
            Scenario::Validate => "validate",
        }
    }
}

/// Uniform grid 0, t_end/n, …, t_end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn points(&self, path: &str) -> HarnessResult<Vec<f64>> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(HarnessError::Config(format!("{path}.t_end: must be positive and finite")));
        }
        if self.n == 0 {
            return Err(HarnessError::Config(format!("{path}.n: must be positive")));
        }
        Ok((0..=self.n).map(|k| self.t_end * k as f64 / self.n as f64).collect())
    }
}

/// Strict JSON decoding; errors name the offending key path.
pub fn parse<T: DeserializeOwned>(text: &str) -> HarnessResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_io() {
            HarnessError::Io(inner.to_string())
        } else {
            HarnessError::Config(format!("at `{path}`: {inner}"))
        }
    })?;
    de.end().map_err(|e| HarnessError::Config(format!("trailing input: {e}")))?;
    Ok(value)
}
