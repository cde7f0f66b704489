//! Closed-form h, S against quadrature of the defining integral.

use openbath_core::damped_oscillator::{gibbs_params, Constants, OscillatorParams};
use openbath_core::spectral_functions::{spectral_pair_closed, spectral_pair_quadrature};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Report;
use crate::error::{HarnessError, HarnessResult};
use crate::output::{num, Output};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionSet {
    /// the Gibbs family at `temperature`
    Thermal,
    /// Gibbs D_qq ×1.2, D_pp ×1.5, D_pq shifted by 0.1·√(D_qq D_pp)
    Nonthermal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffsConfig {
    pub m: f64,
    pub omega: f64,
    pub temperature: f64,
    pub lambda_over_omega: Vec<f64>,
    pub mu_over_lambda: Vec<f64>,
    pub delta_over_omega: Vec<f64>,
    pub diffusion: Vec<DiffusionSet>,
    pub quadrature_rel_tol: f64,
    /// largest accepted closed-vs-quadrature relative error
    pub threshold: f64,
    pub constants: Constants<f64>,
}

impl Default for CoeffsConfig {
    fn default() -> Self {
        CoeffsConfig {
            m: 1.0,
            omega: 1.0,
            temperature: 1.0,
            lambda_over_omega: vec![0.01, 0.1, 0.5],
            mu_over_lambda: vec![0.0, 0.5],
            delta_over_omega: (0..=12).map(|k| -3.0 + 0.5 * k as f64).collect(),
            diffusion: vec![DiffusionSet::Thermal, DiffusionSet::Nonthermal],
            quadrature_rel_tol: 1e-9,
            threshold: 1e-6,
            constants: Constants::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub set: usize,
    pub delta_omega: f64,
    pub h_closed: f64,
    pub s_closed: f64,
    pub h_quad: f64,
    pub s_quad: f64,
    pub rel_err: f64,
}

pub fn parameter_sets(cfg: &CoeffsConfig) -> HarnessResult<Vec<(DiffusionSet, OscillatorParams<f64>)>> {
    let mut out = Vec::new();
    for &kind in &cfg.diffusion {
        for (i, &lo) in cfg.lambda_over_omega.iter().enumerate() {
            for (j, &ml) in cfg.mu_over_lambda.iter().enumerate() {
                let lambda = lo * cfg.omega;
                let g = gibbs_params(cfg.m, cfg.omega, lambda, ml * lambda, cfg.temperature, cfg.constants).map_err(|e| {
                    HarnessError::at(&format!("lambda_over_omega[{i}] / mu_over_lambda[{j}]"), e)
                })?;
                let p = match kind {
                    DiffusionSet::Thermal => g,
                    DiffusionSet::Nonthermal => {
                        let (d_qq, d_pp) = (1.2 * g.d_qq, 1.5 * g.d_pp);
                        let p = OscillatorParams { d_qq, d_pp, d_pq: g.d_pq + 0.1 * (d_qq * d_pp).sqrt(), ..g };
                        p.validated().map_err(|e| HarnessError::at("diffusion", e))?
                    }
                };
                out.push((kind, p));
            }
        }
    }
    Ok(out)
}

pub fn coefficient_table(cfg: &CoeffsConfig) -> HarnessResult<(Vec<(DiffusionSet, OscillatorParams<f64>)>, Vec<CoeffRow>)> {
    let sets = parameter_sets(cfg)?;
    let jobs: Vec<(usize, f64)> =
        (0..sets.len()).flat_map(|s| cfg.delta_over_omega.iter().map(move |&d| (s, d))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(set, d)| {
            let p = &sets[set].1;
            let dw = d * p.omega;
            let closed = spectral_pair_closed(p, dw)?;
            let quad = spectral_pair_quadrature(p, dw, cfg.quadrature_rel_tol)?;
            if !quad.converged {
                return Err(openbath_core::Error::Numerical(format!("quadrature did not converge for set {set}, Δω = {dw}")));
            }
            Ok(CoeffRow {
                set,
                delta_omega: dw,
                h_closed: closed.h,
                s_closed: closed.s,
                h_quad: quad.pair.h,
                s_quad: quad.pair.s,
                rel_err: closed.relative_error(&quad.pair),
            })
        })
        .collect::<openbath_core::Result<Vec<_>>>()
        .map_err(|e| match HarnessError::from(e) {
            HarnessError::Config(m) => HarnessError::Config(format!("quadrature_rel_tol: {m}")),
            other => other,
        })?;
    Ok((sets, rows))
}

pub fn run(cfg: &CoeffsConfig, out: &mut Output) -> HarnessResult<Report> {
    if !(cfg.threshold > 0.0) {
        return Err(HarnessError::Config("threshold: must be positive".into()));
    }
    let (sets, rows) = coefficient_table(cfg)?;
    let set_rows: Vec<Vec<String>> = sets
        .iter()
        .enumerate()
        .map(|(k, (kind, p))| {
            let mut r = vec![k.to_string(), match kind {
                DiffusionSet::Thermal => "thermal".to_string(),
                DiffusionSet::Nonthermal => "nonthermal".to_string(),
            }];
            r.extend([p.m, p.omega, p.lambda, p.mu, p.d_qq, p.d_pp, p.d_pq].iter().map(|x| num(*x)));
            r
        })
        .collect();
    out.csv("sets.csv", &["set", "diffusion", "m", "omega", "lambda", "mu", "d_qq", "d_pp", "d_pq"], &set_rows)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![r.set.to_string(), num(r.delta_omega), num(r.h_closed), num(r.s_closed), num(r.h_quad), num(r.s_quad), num(r.rel_err)]
        })
        .collect();
    out.csv("coeffs.csv", &["set", "delta_omega", "h_closed", "S_closed", "h_quad", "S_quad", "rel_err"], &table)?;
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let mut report = Report::new(serde_json::json!({
        "parameter_sets": sets.len(),
        "rows": rows.len(),
        "max_rel_err": max_rel_err,
    }));
    if !(max_rel_err <= cfg.threshold) {
        report.violate(format!("max rel_err {max_rel_err:e} exceeds {:e}", cfg.threshold));
    }
    Ok(report)
}
