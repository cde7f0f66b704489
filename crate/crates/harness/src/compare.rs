//! Exact composite dynamics against the derived rotating-wave generator.

use num_complex::Complex64;
use openbath_core::damped_oscillator::OscillatorParams;
use openbath_core::lindblad_core::{
    compose_composite_generator, lindblad_generator, partial_trace_operator, propagate_grid, propagate_vec_grid,
    sns_generator, spectral_gap, stationary_state, DensityMatrix, Dims, Operator, Subsystem, EVOLVED_TRACE_TOL,
};
use openbath_core::linear_example::{linear_couplings, system_hamiltonian, system_position, BathCoupling, LinearModelSpec};
use openbath_core::weak_coupling::rwa_master_equation;
use openbath_core::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest composite dimension d_S·d_E accepted.
pub const DIMENSION_BUDGET: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSystem {
    pub m_s: f64,
    pub omega_s: f64,
}

/// Initial system state shared by the composite and reduced runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSystem {
    /// 0.6|+⟩⟨+| + 0.4 diag(0.5, 0.3, 0.2), |+⟩ = (|0⟩ + |1⟩)/√2
    Mixture,
    Fock { n: usize },
}

/// End of the time grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Window {
    /// multiples of 1/λ_eff, the slowest decay time of the reduced generator
    RelaxationTimes(f64),
    TEnd(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatedSpec {
    pub epsilon: f64,
    pub seed: u64,
    /// fraction of the largest admissible correlation amplitude
    #[serde(default = "half")]
    pub fraction: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSetup {
    pub system: HarmonicSystem,
    pub bath_mode: OscillatorParams<f64>,
    pub d_s: usize,
    pub d_e: usize,
    pub epsilons: Vec<f64>,
    pub n_times: usize,
    pub window: Window,
    pub initial: InitialSystem,
    #[serde(default)]
    pub correlated: Option<CorrelatedSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRun {
    pub epsilon: f64,
    pub lambda_eff: Option<f64>,
    pub times: Vec<f64>,
    pub trace_distance: Vec<f64>,
    pub max_trace_distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub next_epsilon: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransientReport {
    pub epsilon: f64,
    pub amplitude: f64,
    /// 10/(λ − μ) of the bath mode
    pub t_threshold: f64,
    pub times: Vec<f64>,
    pub trace_distance: Vec<f64>,
    pub max_after_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub runs: Vec<CouplingRun>,
    pub convergence: Vec<ConvergenceRow>,
    pub transient: Option<TransientReport>,
}

struct Model {
    dims: Dims,
    l_s: openbath_core::lindblad_core::Superoperator,
    l_e: openbath_core::lindblad_core::Superoperator,
    rho_tilde: DensityMatrix,
    q_s: Operator,
    q_e: Operator,
    h_s: Operator,
    hbar: f64,
}

impl CompareSetup {
    fn check(&self) -> Result<()> {
        if self.d_s < 2 || self.d_e < 2 {
            return Err(Error::Dimension("truncations must be at least 2".into()));
        }
        if self.d_s * self.d_e > DIMENSION_BUDGET {
            return Err(Error::Dimension(format!(
                "d_s·d_e = {} exceeds the budget of {DIMENSION_BUDGET}",
                self.d_s * self.d_e
            )));
        }
        if self.n_times < 1 {
            return Err(Error::InvalidParams("n_times must be positive".into()));
        }
        if self.epsilons.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParams("coupling scales must be finite".into()));
        }
        if let InitialSystem::Fock { n } = self.initial {
            if n >= self.d_s {
                return Err(Error::Dimension(format!("Fock level {n} is outside the d_s = {} truncation", self.d_s)));
            }
        }
        match self.window {
            Window::RelaxationTimes(x) | Window::TEnd(x) if !(x > 0.0 && x.is_finite()) => {
                return Err(Error::InvalidParams("window must be positive".into()))
            }
            _ => {}
        }
        if let Some(c) = &self.correlated {
            if !(c.fraction > 0.0 && c.fraction < 1.0) {
                return Err(Error::InvalidParams("correlated.fraction must lie in (0, 1)".into()));
            }
            if self.d_s < 3 || self.d_e < 3 {
                return Err(Error::Dimension("correlated states need d_s, d_e >= 3".into()));
            }
        }
        Ok(())
    }

    fn spec(&self, epsilon: f64) -> LinearModelSpec<f64> {
        LinearModelSpec {
            m_s: self.system.m_s,
            omega_s: self.system.omega_s,
            bath: vec![BathCoupling { c: epsilon, mode: self.bath_mode }],
        }
    }

    fn model(&self) -> Result<Model> {
        let bath = self.bath_mode.validated()?;
        let spec = self.spec(1.0);
        spec.validated()?;
        let hbar = bath.constants.hbar;
        let h_s = system_hamiltonian(&spec, self.d_s)?;
        let l_e = sns_generator(&bath, self.d_e)?;
        let rho_tilde = stationary_state(&l_e)?;
        let q_e = openbath_core::lindblad_core::fock_operators(self.d_e, bath.m, bath.omega, bath.constants)?.q;
        Ok(Model {
            dims: Dims::new(self.d_s, self.d_e),
            l_s: lindblad_generator(&h_s, &[], hbar)?,
            l_e,
            rho_tilde,
            q_s: system_position(&spec, self.d_s)?,
            q_e,
            h_s,
            hbar,
        })
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        let d = self.d_s;
        match self.initial {
            InitialSystem::Fock { n } => {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[n] = Complex64::new(1.0, 0.0);
                DensityMatrix::pure(&v)
            }
            InitialSystem::Mixture => {
                if d < 3 {
                    return Err(Error::Dimension("the mixture initial state needs d_s >= 3".into()));
                }
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut psi = vec![Complex64::new(0.0, 0.0); d];
                psi[0] = Complex64::new(s, 0.0);
                psi[1] = Complex64::new(s, 0.0);
                let mut diag = vec![0.0; d];
                diag[..3].copy_from_slice(&[0.5, 0.3, 0.2]);
                let op = &Operator::outer(&psi, &psi).scale_re(0.6) + &Operator::diagonal(&diag).scale_re(0.4);
                DensityMatrix::new(op)
            }
        }
    }

    fn times(&self, lambda_eff: Option<f64>) -> Result<Vec<f64>> {
        let t_end = match self.window {
            Window::TEnd(t) => t,
            Window::RelaxationTimes(k) => match lambda_eff {
                Some(l) => k / l,
                None => {
                    return Err(Error::InvalidParams(
                        "reduced generator has no decay rate; use a fixed t_end window".into(),
                    ))
                }
            },
        };
        Ok((0..=self.n_times).map(|k| t_end * k as f64 / self.n_times as f64).collect())
    }
}

fn reduced(w: &[Complex64], dims: Dims) -> Result<Operator> {
    let op = Operator::unvec(w, dims.total())?;
    partial_trace_operator(&op, dims, Subsystem::System)
}

fn composite_reduced_series(
    model: &Model,
    epsilon: f64,
    rho0: &Operator,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let u_i = model.q_s.kron(&model.q_e).scale_re(epsilon);
    let l = compose_composite_generator(&model.l_s, &model.l_e, &u_i, model.hbar)?;
    propagate_vec_grid(&l, &rho0.vec(), times)?
        .iter()
        .map(|w| DensityMatrix::from_evolved(reduced(w, model.dims)?, EVOLVED_TRACE_TOL))
        .collect()
}

fn run_one(setup: &CompareSetup, model: &Model, rho_s: &DensityMatrix, epsilon: f64) -> Result<CouplingRun> {
    let couplings = linear_couplings(&setup.spec(epsilon), setup.d_s)?;
    let (_, l_rwa) = rwa_master_equation(&model.h_s, &couplings, None, model.hbar)?;
    let lambda_eff = if epsilon == 0.0 { None } else { spectral_gap(&l_rwa)? };
    let times = setup.times(lambda_eff)?;
    let derived = propagate_grid(&l_rwa, rho_s, &times)?;
    let rho0 = rho_s.operator().kron(model.rho_tilde.operator());
    let exact = composite_reduced_series(model, epsilon, &rho0, &times)?;
    let trace_distance = exact.iter().zip(&derived).map(|(a, b)| a.trace_distance(b)).collect::<Result<Vec<_>>>()?;
    check_unit_interval(&trace_distance)?;
    let max_trace_distance = trace_distance.iter().cloned().fold(0.0, f64::max);
    Ok(CouplingRun { epsilon, lambda_eff, times, trace_distance, max_trace_distance })
}

fn check_unit_interval(xs: &[f64]) -> Result<()> {
    match xs.iter().find(|d| !(**d >= -1e-12 && **d <= 1.0 + 1e-12)) {
        Some(d) => Err(Error::Numerical(format!("trace distance {d} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// ρ_S⊗ρ̃ + c·χ with χ the doubly traceless part of a seeded pure state on the lowest 3×3 levels.
pub fn correlated_state(rho_s: &DensityMatrix, rho_e: &DensityMatrix, seed: u64, fraction: f64) -> Result<(Operator, f64)> {
    let dims = Dims::new(rho_s.dim(), rho_e.dim());
    let n = dims.total();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    for s in 0..3 {
        for e in 0..3 {
            psi[s * dims.d_e + e] = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        }
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    let big = Operator::outer(&psi, &psi);
    let low = |d: usize| {
        let mut v = vec![0.0; d];
        v[..3].fill(1.0 / 3.0);
        Operator::diagonal(&v)
    };
    let (sig_s, sig_e) = (low(dims.d_s), low(dims.d_e));
    let marg_s = partial_trace_operator(&big, dims, Subsystem::System)?;
    let marg_e = partial_trace_operator(&big, dims, Subsystem::Environment)?;
    let chi = &(&(&big - &marg_s.kron(&sig_e)) - &sig_s.kron(&marg_e)) + &sig_s.kron(&sig_e);
    let base = rho_s.operator().kron(rho_e.operator());
    let min_eig = |c: f64| -> Result<f64> { Ok((&base + &chi.scale_re(c)).hermitian_part().eigvalsh()?[0]) };
    let (mut lo, mut hi) = (0.0, 1.0);
    while min_eig(hi)? >= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Numerical("correlation amplitude is unbounded".into()));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if min_eig(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let amp = fraction * lo;
    Ok((&base + &chi.scale_re(amp), amp))
}

fn transient(setup: &CompareSetup, model: &Model, rho_s: &DensityMatrix, spec: &CorrelatedSpec) -> Result<TransientReport> {
    let couplings = linear_couplings(&setup.spec(spec.epsilon), setup.d_s)?;
    let (_, l_rwa) = rwa_master_equation(&model.h_s, &couplings, None, model.hbar)?;
    let lambda_eff = if spec.epsilon == 0.0 { None } else { spectral_gap(&l_rwa)? };
    let times = setup.times(lambda_eff)?;
    let product = rho_s.operator().kron(model.rho_tilde.operator());
    let (correlated, amplitude) = correlated_state(rho_s, &model.rho_tilde, spec.seed, spec.fraction)?;
    let (a, b) = rayon::join(
        || composite_reduced_series(model, spec.epsilon, &product, &times),
        || composite_reduced_series(model, spec.epsilon, &correlated, &times),
    );
    let (a, b) = (a?, b?);
    let trace_distance = a.iter().zip(&b).map(|(x, y)| x.trace_distance(y)).collect::<Result<Vec<_>>>()?;
    check_unit_interval(&trace_distance)?;
    let t_threshold = 10.0 / (setup.bath_mode.lambda - setup.bath_mode.mu);
    let max_after_threshold =
        times.iter().zip(&trace_distance).filter(|(t, _)| **t >= t_threshold).map(|(_, d)| *d).fold(0.0, f64::max);
    Ok(TransientReport { epsilon: spec.epsilon, amplitude, t_threshold, times, trace_distance, max_after_threshold })
}

/// Trace-distance series per coupling scale, the halving table, and the optional correlated-start series.
pub fn compare_reduced_vs_derived(setup: &CompareSetup) -> Result<ComparisonReport> {
    setup.check()?;
    let model = setup.model()?;
    let rho_s = setup.initial_state()?;
    let runs: Vec<CouplingRun> =
        setup.epsilons.par_iter().map(|&eps| run_one(setup, &model, &rho_s, eps)).collect::<Result<_>>()?;
    let convergence = runs
        .windows(2)
        .map(|w| ConvergenceRow {
            epsilon: w[0].epsilon,
            next_epsilon: w[1].epsilon,
            ratio: w[0].max_trace_distance / w[1].max_trace_distance,
        })
        .collect();
    let transient = setup.correlated.as_ref().map(|c| transient(setup, &model, &rho_s, c)).transpose()?;
    Ok(ComparisonReport { runs, convergence, transient })
}

