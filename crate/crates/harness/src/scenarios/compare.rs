//! Composite-vs-derived scenario wrapper.

use serde::{Deserialize, Serialize};

use super::Report;
use crate::compare::{compare_reduced_vs_derived, CompareSetup};
use crate::error::HarnessResult;
use crate::output::{num, Output};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub setup: CompareSetup,
    /// enforced band for every halving ratio
    #[serde(default)]
    pub ratio_band: Option<(f64, f64)>,
    /// enforced bound on the correlated-vs-product distance after 10/(λ − μ)
    #[serde(default)]
    pub transient_bound: Option<f64>,
}

pub fn run(cfg: &CompareConfig, out: &mut Output) -> HarnessResult<Report> {
    let report = compare_reduced_vs_derived(&cfg.setup)?;
    let mut rows = Vec::new();
    for r in &report.runs {
        for (t, d) in r.times.iter().zip(&r.trace_distance) {
            rows.push(vec![num(r.epsilon), num(*t), num(*d)]);
        }
    }
    out.csv("compare.csv", &["epsilon", "t", "trace_distance"], &rows)?;
    let conv: Vec<Vec<String>> = report
        .runs
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let ratio = if k > 0 { num(report.convergence[k - 1].ratio) } else { String::new() };
            vec![num(r.epsilon), r.lambda_eff.map(num).unwrap_or_default(), num(r.max_trace_distance), ratio]
        })
        .collect();
    out.csv("convergence.csv", &["epsilon", "lambda_eff", "max_trace_distance", "ratio_from_previous"], &conv)?;
    if let Some(tr) = &report.transient {
        let rows: Vec<Vec<String>> = tr.times.iter().zip(&tr.trace_distance).map(|(t, d)| vec![num(*t), num(*d)]).collect();
        out.csv("transient.csv", &["t", "trace_distance"], &rows)?;
    }
    let mut rep = Report::new(serde_json::json!({
        "runs": report.runs.iter().map(|r| serde_json::json!({
            "epsilon": r.epsilon,
            "lambda_eff": r.lambda_eff,
            "max_trace_distance": r.max_trace_distance,
        })).collect::<Vec<_>>(),
        "convergence": report.convergence,
        "transient": report.transient.as_ref().map(|t| serde_json::json!({
            "epsilon": t.epsilon,
            "amplitude": t.amplitude,
            "t_threshold": t.t_threshold,
            "max_after_threshold": t.max_after_threshold,
        })),
    }));
    if let Some((lo, hi)) = cfg.ratio_band {
        for c in &report.convergence {
            if !(c.ratio >= lo && c.ratio <= hi) {
                rep.violate(format!("halving {} -> {}: ratio {:.4} outside [{lo}, {hi}]", c.epsilon, c.next_epsilon, c.ratio));
            }
        }
    }
    if let (Some(bound), Some(tr)) = (cfg.transient_bound, &report.transient) {
        if !(tr.max_after_threshold < bound) {
            rep.violate(format!("transient distance {:e} not below {bound:e}", tr.max_after_threshold));
        }
    }
    Ok(rep)
}
