//! Classical composite Langevin runs and their Markov limit.

use openbath_core::classical_bath::{
    ensemble_statistics, markov_kernel, markov_langevin, mode_kernel, simulate_composite_langevin, time_moments,
    ClassicalBathMode, ClassicalSystemSpec, Coupling, EnsembleStatistics, LangevinRun, Potential,
    StatisticsOptions, TrajectoryEnsemble,
};
use serde::{Deserialize, Serialize};

use super::Report;
use crate::error::{HarnessError, HarnessResult};
use crate::output::{num, Output};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Composite,
    Markov,
    Both,
}

fn both() -> Integrator {
    Integrator::Both
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    pub system: ClassicalSystemSpec,
    pub bath: Vec<ClassicalBathMode>,
    pub run: LangevinRun,
    #[serde(default = "both")]
    pub integrator: Integrator,
    /// defaults: discard 10/min γ, lags up to 5/min γ
    #[serde(default)]
    pub statistics: Option<StatisticsOptions>,
}

impl ClassicalConfig {
    pub fn statistics_options(&self) -> HarnessResult<StatisticsOptions> {
        if let Some(s) = self.statistics {
            return Ok(s);
        }
        let g = self.bath.iter().map(|b| b.gamma).fold(f64::INFINITY, f64::min);
        if !g.is_finite() {
            return Err(HarnessError::Config("statistics: required when the bath is empty".into()));
        }
        Ok(StatisticsOptions { discard: 10.0 / g, max_lag: 5.0 / g })
    }
}

/// k_BT η(τ) for linear couplings; NaN when any coupling is position dependent.
pub fn noise_target(bath: &[ClassicalBathMode], temperature: f64, tau: f64) -> f64 {
    bath.iter()
        .map(|b| match b.coupling {
            Coupling::Linear { c } => temperature * c * c * mode_kernel(b.m, b.omega, b.gamma, tau),
            Coupling::Custom { .. } => f64::NAN,
        })
        .sum()
}

fn moments_rows(ens: &TrajectoryEnsemble) -> HarnessResult<Vec<Vec<String>>> {
    Ok(time_moments(ens)?
        .iter()
        .map(|(t, x2, v2)| vec![num(*t), num(x2.mean), num(x2.err), num(v2.mean), num(v2.err)])
        .collect())
}

fn stats_rows(st: &EnsembleStatistics, bath: &[ClassicalBathMode], temperature: f64) -> Vec<Vec<String>> {
    (0..st.lags.len())
        .map(|k| {
            let mut r = vec![
                num(st.lags[k]),
                num(st.autocorrelation_x[k].mean),
                num(st.autocorrelation_x[k].err),
                num(st.autocorrelation_v[k].mean),
                num(st.autocorrelation_v[k].err),
            ];
            match &st.noise_correlation {
                Some(n) => r.extend([num(n[k].mean), num(n[k].err), num(noise_target(bath, temperature, st.lags[k]))]),
                None => r.extend(["".into(), "".into(), "".into()]),
            }
            r
        })
        .collect()
}

const MOMENT_HEADER: [&str; 5] = ["t", "x2", "x2_err", "v2", "v2_err"];
const STATS_HEADER: [&str; 8] = ["lag", "acf_x", "acf_x_err", "acf_v", "acf_v_err", "noise", "noise_err", "noise_target"];

pub fn run(cfg: &ClassicalConfig, out: &mut Output) -> HarnessResult<Report> {
    let opts = cfg.statistics_options()?;
    let kt = cfg.run.temperature;
    let eta_bar = markov_kernel(&cfg.bath, cfg.system.x0, cfg.system.x0);
    let mut results = serde_json::Map::new();
    results.insert("eta_bar".into(), eta_bar.into());
    results.insert("equipartition_v2".into(), (kt / cfg.system.m).into());
    if let Potential::Harmonic { stiffness } = cfg.system.potential {
        results.insert("equipartition_x2".into(), (kt / stiffness).into());
    }
    if matches!(cfg.integrator, Integrator::Composite | Integrator::Both) {
        let ens = simulate_composite_langevin(&cfg.system, &cfg.bath, &cfg.run).map_err(|e| HarnessError::at("run", e))?;
        let st = ensemble_statistics(&ens, Some(&cfg.bath), &opts).map_err(|e| HarnessError::at("statistics", e))?;
        out.csv("composite_moments.csv", &MOMENT_HEADER, &moments_rows(&ens)?)?;
        out.csv("composite_stats.csv", &STATS_HEADER, &stats_rows(&st, &cfg.bath, kt))?;
        results.insert("composite".into(), serde_json::to_value(st.moments).expect("plain data"));
    }
    if matches!(cfg.integrator, Integrator::Markov | Integrator::Both) {
        let ens = markov_langevin(&cfg.system, eta_bar, &cfg.run).map_err(|e| HarnessError::at("run", e))?;
        let st = ensemble_statistics(&ens, None, &opts).map_err(|e| HarnessError::at("statistics", e))?;
        out.csv("markov_moments.csv", &MOMENT_HEADER, &moments_rows(&ens)?)?;
        out.csv("markov_stats.csv", &STATS_HEADER, &stats_rows(&st, &cfg.bath, kt))?;
        results.insert("markov".into(), serde_json::to_value(st.moments).expect("plain data"));
    }
    Ok(Report::new(serde_json::Value::Object(results)))
}
