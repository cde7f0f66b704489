//! Relaxation of the harmonic system under the derived rotating-wave generator.

use num_complex::Complex64;
use openbath_core::damped_oscillator::Constants;
use openbath_core::lindblad_core::{propagate_grid, stationary_state, DensityMatrix, Operator};
use openbath_core::linear_example::{
    bose_occupancy, discretized_thermal_bath, effective_coefficients, linear_couplings, system_hamiltonian,
    thermal_weak_damping_coefficients, BathCoupling, LinearModelSpec,
};
use openbath_core::weak_coupling::rwa_master_equation;
use serde::{Deserialize, Serialize};

use super::Report;
use crate::compare::HarmonicSystem;
use crate::config::TimeGrid;
use crate::error::{HarnessError, HarnessResult};
use crate::output::{num, Output};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThermalBath {
    /// Gibbs modes with ω uniform over band·ω_S and one common coupling
    Discretized {
        #[serde(default = "sixteen")]
        n_modes: usize,
        #[serde(default = "default_band")]
        band: (f64, f64),
        coupling: f64,
        #[serde(default = "one")]
        mode_mass: f64,
        lambda_over_omega: f64,
        temperature: f64,
        #[serde(default)]
        constants: Constants<f64>,
    },
    Modes { modes: Vec<BathCoupling<f64>> },
}

fn sixteen() -> usize {
    16
}

fn default_band() -> (f64, f64) {
    (0.2, 2.0)
}

fn one() -> f64 {
    1.0
}

fn thirty() -> usize {
    30
}

fn ten() -> f64 {
    10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalizeConfig {
    pub system: HarmonicSystem,
    pub bath: ThermalBath,
    #[serde(default = "thirty")]
    pub d: usize,
    #[serde(default)]
    pub initial_n: usize,
    /// explicit grid; the default spans `relaxation_times`/λ_eff in 100 steps
    #[serde(default)]
    pub times: Option<TimeGrid>,
    #[serde(default = "ten")]
    pub relaxation_times: f64,
    /// enforced bound on |⟨N⟩ − n_BE|/n_BE at stationarity
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thermalization {
    pub lambda_eff: f64,
    pub delta_omega_s: f64,
    pub temperature: Option<f64>,
    pub stationary_occupancy: f64,
    pub bose_occupancy: Option<f64>,
    pub relative_deviation: Option<f64>,
    pub times: Vec<f64>,
    pub occupancy: Vec<f64>,
    pub purity: Vec<f64>,
    pub gibbs_distance: Vec<f64>,
}

pub fn model(cfg: &ThermalizeConfig) -> HarnessResult<LinearModelSpec<f64>> {
    let (m_s, omega_s) = (cfg.system.m_s, cfg.system.omega_s);
    let spec = match &cfg.bath {
        ThermalBath::Discretized { n_modes, band, coupling, mode_mass, lambda_over_omega, temperature, constants } => {
            discretized_thermal_bath(m_s, omega_s, *n_modes, *band, *coupling, *mode_mass, *lambda_over_omega, *temperature, *constants)
                .map_err(|e| HarnessError::at("bath", e))?
        }
        ThermalBath::Modes { modes } => LinearModelSpec { m_s, omega_s, bath: modes.clone() },
    };
    spec.validated().map_err(|e| HarnessError::at("bath", e))?;
    Ok(spec)
}

fn common_temperature(ts: &[f64]) -> Option<f64> {
    let first = *ts.first()?;
    ts.iter().all(|t| (t - first).abs() <= 1e-9 * first).then_some(first)
}

pub fn thermalize(cfg: &ThermalizeConfig) -> HarnessResult<Thermalization> {
    let spec = model(cfg)?;
    let d = cfg.d;
    if cfg.initial_n >= d {
        return Err(HarnessError::Config(format!("initial_n: level {} outside the d = {d} truncation", cfg.initial_n)));
    }
    let constants = spec.constants()?;
    let eff = effective_coefficients(&spec)?;
    let temperature = match thermal_weak_damping_coefficients(&spec) {
        Ok(t) => common_temperature(&t.temperatures),
        Err(_) => None,
    };
    let h_s = system_hamiltonian(&spec, d).map_err(|e| HarnessError::at("d", e))?;
    let (_, l) = rwa_master_equation(&h_s, &linear_couplings(&spec, d)?, None, constants.hbar)?;
    let number = Operator::diagonal(&(0..d).map(|n| n as f64).collect::<Vec<_>>());
    let stationary = stationary_state(&l)?;
    let stationary_occupancy = stationary.expectation(&number).re;
    let shifted = spec.omega_s + eff.delta_omega_s;
    let bose = temperature.map(|t| bose_occupancy(shifted, t, constants));
    let relative_deviation = bose.map(|b| (stationary_occupancy - b).abs() / b);

    let times = match cfg.times {
        Some(g) => g.points("times")?,
        None => {
            if !eff.is_damping() {
                return Err(HarnessError::Config("times: required when the effective friction is not positive".into()));
            }
            TimeGrid { t_end: cfg.relaxation_times / eff.lambda_eff, n: 100 }.points("relaxation_times")?
        }
    };
    let mut psi = vec![Complex64::new(0.0, 0.0); d];
    psi[cfg.initial_n] = Complex64::new(1.0, 0.0);
    let states = propagate_grid(&l, &DensityMatrix::pure(&psi)?, &times)?;
    let gibbs = match temperature {
        Some(t) => {
            let h = Operator::diagonal(&(0..d).map(|n| constants.hbar * shifted * (n as f64 + 0.5)).collect::<Vec<_>>());
            Some(DensityMatrix::gibbs(&h, constants.k_b * t)?)
        }
        None => None,
    };
    let gibbs_distance = states
        .iter()
        .map(|s| gibbs.as_ref().map_or(Ok(f64::NAN), |g| s.trace_distance(g)))
        .collect::<openbath_core::Result<Vec<_>>>()?;
    Ok(Thermalization {
        lambda_eff: eff.lambda_eff,
        delta_omega_s: eff.delta_omega_s,
        temperature,
        stationary_occupancy,
        bose_occupancy: bose,
        relative_deviation,
        occupancy: states.iter().map(|s| s.expectation(&number).re).collect(),
        purity: states.iter().map(|s| s.purity()).collect(),
        gibbs_distance,
        times,
    })
}

pub fn run(cfg: &ThermalizeConfig, out: &mut Output) -> HarnessResult<Report> {
    let th = thermalize(cfg)?;
    let rows: Vec<Vec<String>> = (0..th.times.len())
        .map(|k| vec![num(th.times[k]), num(th.occupancy[k]), num(th.purity[k]), num(th.gibbs_distance[k])])
        .collect();
    out.csv("thermalize.csv", &["t", "n_mean", "purity", "trace_distance_gibbs"], &rows)?;
    let spec = model(cfg)?;
    let mut report = Report::new(serde_json::json!({
        "effective": effective_coefficients(&spec)?,
        "thermal": thermal_weak_damping_coefficients(&spec).ok(),
        "temperature": th.temperature,
        "shifted_frequency": spec.omega_s + th.delta_omega_s,
        "stationary_occupancy": th.stationary_occupancy,
        "bose_occupancy": th.bose_occupancy,
        "relative_deviation": th.relative_deviation,
    }));
    if th.lambda_eff <= 0.0 {
        report.violate(format!("effective friction {:e} is not positive", th.lambda_eff));
    }
    if let Some(tol) = cfg.tolerance {
        match th.relative_deviation {
            Some(r) if r <= tol => {}
            Some(r) => report.violate(format!("stationary occupancy deviates from Bose-Einstein by {r:e} > {tol:e}")),
            None => report.violate("tolerance set but the bath has no common Gibbs temperature".into()),
        }
    }
    Ok(report)
}
