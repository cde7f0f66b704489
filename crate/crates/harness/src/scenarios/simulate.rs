//! One damped mode on a Fock truncation against its closed-form moment flow.

use num_complex::Complex64;
use openbath_core::damped_oscillator::{asymptotic_moments, evolve_moments, MomentState, OscillatorParams};
use openbath_core::lindblad_core::{
    fock_operators, propagate_grid, sns_generator, stationary_state, DensityMatrix, FockOperators,
};
use serde::{Deserialize, Serialize};

use super::Report;
use crate::config::TimeGrid;
use crate::error::{HarnessError, HarnessResult};
use crate::output::{num, Output};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeInitial {
    Fock { n: usize },
    /// truncated and renormalized |α⟩
    Coherent { re: f64, im: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub mode: OscillatorParams<f64>,
    #[serde(default = "forty")]
    pub d: usize,
    pub initial: ModeInitial,
    pub times: TimeGrid,
}

fn forty() -> usize {
    40
}

pub fn initial_state(init: &ModeInitial, d: usize) -> HarnessResult<DensityMatrix> {
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    match *init {
        ModeInitial::Fock { n } => {
            if n >= d {
                return Err(HarnessError::Config(format!("initial.n: level {n} outside the d = {d} truncation")));
            }
            v[n] = Complex64::new(1.0, 0.0);
        }
        ModeInitial::Coherent { re, im } => {
            let alpha = Complex64::new(re, im);
            let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
            for (n, slot) in v.iter_mut().enumerate() {
                if n > 0 {
                    amp = amp * alpha / (n as f64).sqrt();
                }
                *slot = amp;
            }
        }
    }
    Ok(DensityMatrix::pure(&v)?)
}

pub fn moments(rho: &DensityMatrix, f: &FockOperators) -> MomentState<f64> {
    let e = |o: &openbath_core::lindblad_core::Operator| rho.expectation(o).re;
    let sym = &f.q.dot(&f.p) + &f.p.dot(&f.q);
    MomentState { mean_q: e(&f.q), mean_p: e(&f.p), qq: e(&f.q.dot(&f.q)), pp: e(&f.p.dot(&f.p)), s_pq: 0.5 * e(&sym) }
}

pub struct MomentSeries {
    pub times: Vec<f64>,
    pub numerical: Vec<MomentState<f64>>,
    pub analytic: Vec<MomentState<f64>>,
    pub states: Vec<DensityMatrix>,
}

/// Superoperator propagation alongside the closed-form flow from the same initial moments.
pub fn moment_series(p: &OscillatorParams<f64>, d: usize, rho0: &DensityMatrix, times: &[f64]) -> HarnessResult<MomentSeries> {
    let p = p.validated().map_err(|e| HarnessError::at("mode", e))?;
    let f = fock_operators(d, p.m, p.omega, p.constants).map_err(|e| HarnessError::at("d", e))?;
    let l = sns_generator(&p, d)?;
    let states = propagate_grid(&l, rho0, times)?;
    let m0 = moments(rho0, &f);
    let numerical = states.iter().map(|s| moments(s, &f)).collect();
    let analytic = times.iter().map(|&t| evolve_moments(&p, &m0, t)).collect::<openbath_core::Result<_>>()?;
    Ok(MomentSeries { times: times.to_vec(), numerical, analytic, states })
}

pub fn run(cfg: &SimulateConfig, out: &mut Output) -> HarnessResult<Report> {
    let times = cfg.times.points("times")?;
    let rho0 = initial_state(&cfg.initial, cfg.d)?;
    let series = moment_series(&cfg.mode, cfg.d, &rho0, &times)?;
    let rows: Vec<Vec<String>> = (0..times.len())
        .map(|k| {
            let (a, b) = (&series.numerical[k], &series.analytic[k]);
            let s = &series.states[k];
            vec![
                num(times[k]),
                num(a.mean_q),
                num(a.mean_p),
                num(a.qq),
                num(a.pp),
                num(a.s_pq),
                num(b.mean_q),
                num(b.mean_p),
                num(b.qq),
                num(b.pp),
                num(b.s_pq),
                num(s.purity()),
            ]
        })
        .collect();
    out.csv(
        "moments.csv",
        &["t", "q", "p", "qq", "pp", "s_pq", "q_exact", "p_exact", "qq_exact", "pp_exact", "s_pq_exact", "purity"],
        &rows,
    )?;
    let max_dev = series.numerical.iter().zip(&series.analytic).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
    let l = sns_generator(&cfg.mode, cfg.d)?;
    let f = fock_operators(cfg.d, cfg.mode.m, cfg.mode.omega, cfg.mode.constants)?;
    let stationary = moments(&stationary_state(&l)?, &f);
    let asym = asymptotic_moments(&cfg.mode)?;
    Ok(Report::new(serde_json::json!({
        "max_moment_deviation": max_dev,
        "stationary_moments": stationary,
        "asymptotic_moments": asym,
        "stationary_deviation": stationary.max_abs_diff(&asym),
    })))
}
