//! Runs the acceptance criteria and tabulates pass/fail.

use serde::{Deserialize, Serialize};

use super::Report;
use crate::error::{HarnessError, HarnessResult};
use crate::output::{num, Output};
use crate::validation::{criterion, simple_markov_limitation, CriterionResult, ALL};

fn all() -> Vec<u8> {
    ALL.to_vec()
}

fn default_seed() -> u64 {
    7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "all")]
    pub criteria: Vec<u8>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { criteria: all(), seed: default_seed() }
    }
}

pub fn run(cfg: &ValidateConfig, out: &mut Output) -> HarnessResult<Report> {
    for (i, id) in cfg.criteria.iter().enumerate() {
        if !ALL.contains(id) {
            return Err(HarnessError::Config(format!("criteria[{i}]: no criterion {id}")));
        }
    }
    let mut results: Vec<CriterionResult> = Vec::new();
    for &id in &cfg.criteria {
        if id == 10 {
            let (r, s) = simple_markov_limitation()?;
            let rows: Vec<Vec<String>> = (0..s.times.len())
                .map(|k| vec![num(s.times[k]), num(s.energy_simple[k]), num(s.energy_rwa[k]), num(s.distance_rwa[k])])
                .collect();
            out.csv("simple_markov.csv", &["t", "energy_simple_markov", "energy_rwa", "rwa_distance_to_stationary"], &rows)?;
            results.push(r);
        } else {
            results.push(criterion(id, cfg.seed)?);
        }
    }
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![r.id.to_string(), r.name.clone(), if r.passed { "PASS" } else { "FAIL" }.into(), num(r.metric), r.threshold.clone(), r.detail.clone()]
        })
        .collect();
    out.csv("validate.csv", &["criterion", "name", "status", "metric", "threshold", "detail"], &rows)?;
    let mut rep = Report::new(serde_json::to_value(&results).expect("plain data"));
    for r in results.iter().filter(|r| !r.passed) {
        rep.violate(format!("criterion {} ({}) failed: {}", r.id, r.name, r.detail));
    }
    Ok(rep)
}
