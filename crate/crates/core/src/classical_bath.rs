//! Classical system coupled to damped, noise-driven bath oscillators, and its Markov limit.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Shared scalar function, for user-supplied potentials and couplings.
#[derive(Clone)]
pub struct Func(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl Func {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Func(Arc::new(f))
    }

    fn call(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Func(..)")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    /// ½kx²
    Harmonic { stiffness: f64 },
    /// ½ax² + ¼bx⁴
    Quartic { a: f64, b: f64 },
    #[serde(skip)]
    Custom { value: Func, derivative: Func, timescale: f64 },
}

impl Potential {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::Harmonic { stiffness } => 0.5 * stiffness * x * x,
            Potential::Quartic { a, b } => 0.5 * a * x * x + 0.25 * b * x.powi(4),
            Potential::Custom { value, .. } => value.call(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Potential::Harmonic { stiffness } => stiffness * x,
            Potential::Quartic { a, b } => a * x + b * x.powi(3),
            Potential::Custom { derivative, .. } => derivative.call(x),
        }
    }

    fn curvature_at(&self, x: f64) -> Option<f64> {
        match self {
            Potential::Harmonic { stiffness } => Some(stiffness.abs()),
            Potential::Quartic { a, b } => Some((a + 3.0 * b * x * x).abs()),
            Potential::Custom { .. } => None,
        }
    }
}

/// a_μ(x) and its derivative.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coupling {
    Linear { c: f64 },
    #[serde(skip)]
    Custom { value: Func, derivative: Func },
}

impl Coupling {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Coupling::Linear { c } => c * x,
            Coupling::Custom { value, .. } => value.call(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Coupling::Linear { c } => *c,
            Coupling::Custom { derivative, .. } => derivative.call(x),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSystemSpec {
    pub m: f64,
    pub potential: Potential,
    pub x0: f64,
    pub v0: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalBathMode {
    pub m: f64,
    pub omega: f64,
    pub gamma: f64,
    pub coupling: Coupling,
    #[serde(default)]
    pub q0: f64,
    #[serde(default)]
    pub v0: f64,
}

impl ClassicalBathMode {
    pub fn linear(m: f64, omega: f64, gamma: f64, c: f64) -> Self {
        ClassicalBathMode { m, omega, gamma, coupling: Coupling::Linear { c }, q0: 0.0, v0: 0.0 }
    }

    pub fn big_omega(&self) -> f64 {
        (self.omega * self.omega - self.gamma * self.gamma).sqrt()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(invalid(format!("bath mode {n}: mass must be positive")));
        }
        if !(self.gamma > 0.0 && self.omega > self.gamma) {
            return Err(invalid(format!("bath mode {n}: needs omega > gamma > 0 (underdamped)")));
        }
        Ok(())
    }
}

/// How bath coordinates are drawn at t = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BathInit {
    /// q₀, v₀ as given in each mode
    Fixed,
    /// q at its coupling-shifted minimum, v = 0
    Rest,
    /// Gibbs sample at the given temperature around the shifted minimum
    Thermal { temperature: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinRun {
    pub temperature: f64,
    pub dt: f64,
    pub t_end: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// keep every k-th step
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default = "fixed_init")]
    pub bath_init: BathInit,
}

fn one() -> usize {
    1
}

fn fixed_init() -> BathInit {
    BathInit::Fixed
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Σ m_μω_μ²(q_μ − a_μ(x))a′_μ(x); empty for Markov runs
    pub bath_force: Vec<f64>,
    /// per mode, when recorded
    pub q: Vec<Vec<f64>>,
    pub bath_v: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEnsemble {
    pub seed: u64,
    pub dt: f64,
    pub record_every: usize,
    pub times: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
}

impl TrajectoryEnsemble {
    pub fn record_dt(&self) -> f64 {
        self.dt * self.record_every as f64
    }
}

fn check_run(run: &LangevinRun) -> Result<usize> {
    if !(run.temperature >= 0.0 && run.temperature.is_finite()) {
        return Err(invalid("temperature must be nonnegative"));
    }
    if !(run.dt > 0.0 && run.t_end >= 0.0) {
        return Err(invalid("dt must be positive and t_end nonnegative"));
    }
    if run.n_traj == 0 || run.record_every == 0 {
        return Err(invalid("n_traj and record_every must be positive"));
    }
    Ok((run.t_end / run.dt).round() as usize)
}

fn check_step(dt: f64, timescale: f64, what: &str) -> Result<()> {
    if dt > 0.05 * timescale {
        return Err(invalid(format!("dt = {dt} exceeds 0.05 × the {what} time scale {timescale:.4e}")));
    }
    Ok(())
}

fn system_timescale(system: &ClassicalSystemSpec, bath: &[ClassicalBathMode]) -> Option<f64> {
    let coupling: f64 =
        bath.iter().map(|b| b.m * b.omega * b.omega * b.coupling.derivative(system.x0).powi(2)).sum();
    let k = match &system.potential {
        Potential::Custom { timescale, .. } => return Some(*timescale),
        p => p.curvature_at(system.x0).unwrap_or(0.0),
    } + coupling;
    if k > 0.0 {
        Some((system.m / k).sqrt())
    } else {
        None
    }
}

/// One ChaCha stream per (trajectory, slot); slot 0 is the system, μ+1 the bath modes.
fn stream(seed: u64, traj: usize, slot: usize, slots: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((traj * slots + slot) as u64);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Exact Ornstein–Uhlenbeck update of a velocity with friction rate `rate`.
fn ou_coefficients(rate: f64, kt_over_m: f64, dt: f64) -> (f64, f64) {
    let e = (-rate * dt).exp();
    (e, (kt_over_m * (1.0 - e * e)).sqrt())
}

/// Composite system + bath by B·A·O·A·B splitting, the O step exact per mode.
pub fn simulate_composite_langevin(
    system: &ClassicalSystemSpec,
    bath: &[ClassicalBathMode],
    run: &LangevinRun,
) -> Result<TrajectoryEnsemble> {
    let steps = check_run(run)?;
    if !(system.m > 0.0) {
        return Err(invalid("system mass must be positive"));
    }
    for (n, b) in bath.iter().enumerate() {
        b.validate(n)?;
        check_step(run.dt, (1.0 / b.omega).min(1.0 / b.gamma), &format!("bath mode {n}"))?;
    }
    if let Some(ts) = system_timescale(system, bath) {
        check_step(run.dt, ts, "system")?;
    }
    if let BathInit::Thermal { temperature } = run.bath_init {
        if !(temperature >= 0.0) {
            return Err(invalid("bath initial temperature must be nonnegative"));
        }
    }
    let slots = bath.len() + 1;
    let kt = run.temperature;
    let h = run.dt;
    let ou: Vec<(f64, f64)> = bath.iter().map(|b| ou_coefficients(2.0 * b.gamma, kt / b.m, h)).collect();
    let times = record_times(steps, run.record_every, h);

    let trajectories: Vec<Trajectory> = (0..run.n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rngs: Vec<ChaCha8Rng> = (1..slots).map(|k| stream(run.seed, traj, k, slots)).collect();
            let mut x = system.x0;
            let mut v = system.v0;
            let mut q: Vec<f64> = Vec::with_capacity(bath.len());
            let mut u: Vec<f64> = Vec::with_capacity(bath.len());
            for (b, rng) in bath.iter().zip(rngs.iter_mut()) {
                let centre = b.coupling.value(x);
                match run.bath_init {
                    BathInit::Fixed => {
                        q.push(b.q0);
                        u.push(b.v0);
                    }
                    BathInit::Rest => {
                        q.push(centre);
                        u.push(0.0);
                    }
                    BathInit::Thermal { temperature } => {
                        q.push(centre + (temperature / (b.m * b.omega * b.omega)).sqrt() * normal(rng));
                        u.push((temperature / b.m).sqrt() * normal(rng));
                    }
                }
            }
            let forces = |x: f64, q: &[f64], fq: &mut [f64]| -> (f64, f64) {
                let mut fx = -system.potential.derivative(x);
                let mut fb = 0.0;
                for (k, b) in bath.iter().enumerate() {
                    let stretch = b.m * b.omega * b.omega * (q[k] - b.coupling.value(x));
                    fb += stretch * b.coupling.derivative(x);
                    fq[k] = -stretch;
                }
                fx += fb;
                (fx, fb)
            };
            let mut fq = vec![0.0; bath.len()];
            let (mut fx, mut fb) = forces(x, &q, &mut fq);
            let mut out = Trajectory {
                x: Vec::with_capacity(times.len()),
                v: Vec::with_capacity(times.len()),
                bath_force: Vec::with_capacity(times.len()),
                q: vec![Vec::with_capacity(times.len()); bath.len()],
                bath_v: vec![Vec::with_capacity(times.len()); bath.len()],
            };
            let record = |x: f64, v: f64, fb: f64, q: &[f64], u: &[f64], out: &mut Trajectory| {
                out.x.push(x);
                out.v.push(v);
                out.bath_force.push(fb);
                for k in 0..q.len() {
                    out.q[k].push(q[k]);
                    out.bath_v[k].push(u[k]);
                }
            };
            record(x, v, fb, &q, &u, &mut out);
            for step in 1..=steps {
                v += 0.5 * h * fx / system.m;
                for k in 0..bath.len() {
                    u[k] += 0.5 * h * fq[k] / bath[k].m;
                }
                x += 0.5 * h * v;
                for k in 0..bath.len() {
                    q[k] += 0.5 * h * u[k];
                }
                for k in 0..bath.len() {
                    let (e, s) = ou[k];
                    u[k] = e * u[k] + s * normal(&mut rngs[k]);
                }
                x += 0.5 * h * v;
                for k in 0..bath.len() {
                    q[k] += 0.5 * h * u[k];
                }
                let f = forces(x, &q, &mut fq);
                fx = f.0;
                fb = f.1;
                v += 0.5 * h * fx / system.m;
                for k in 0..bath.len() {
                    u[k] += 0.5 * h * fq[k] / bath[k].m;
                }
                if step % run.record_every == 0 {
                    record(x, v, fb, &q, &u, &mut out);
                }
            }
            out
        })
        .collect();
    Ok(TrajectoryEnsemble { seed: run.seed, dt: h, record_every: run.record_every, times, trajectories })
}

fn record_times(steps: usize, every: usize, h: f64) -> Vec<f64> {
    (0..=steps).filter(|s| s % every == 0).map(|s| s as f64 * h).collect()
}

/// m ẍ = −U′(x) − η̄ẋ + F_s with ⟨F_sF_s⟩ = 2k_BTη̄δ, by B·A·O·A·B splitting.
pub fn markov_langevin(system: &ClassicalSystemSpec, eta_bar: f64, run: &LangevinRun) -> Result<TrajectoryEnsemble> {
    let steps = check_run(run)?;
    if !(system.m > 0.0) {
        return Err(invalid("system mass must be positive"));
    }
    if !(eta_bar >= 0.0) {
        return Err(invalid("eta_bar must be nonnegative"));
    }
    if let Some(ts) = system_timescale(system, &[]) {
        check_step(run.dt, ts, "system")?;
    }
    if eta_bar > 0.0 {
        check_step(run.dt, system.m / eta_bar, "friction")?;
    }
    let h = run.dt;
    let (e, s) = ou_coefficients(eta_bar / system.m, run.temperature / system.m, h);
    let times = record_times(steps, run.record_every, h);
    let trajectories = (0..run.n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rng = stream(run.seed, traj, 0, 1);
            let (mut x, mut v) = (system.x0, system.v0);
            let mut fx = -system.potential.derivative(x);
            let mut out = Trajectory {
                x: Vec::with_capacity(times.len()),
                v: Vec::with_capacity(times.len()),
                bath_force: Vec::new(),
                q: Vec::new(),
                bath_v: Vec::new(),
            };
            out.x.push(x);
            out.v.push(v);
            for step in 1..=steps {
                v += 0.5 * h * fx / system.m;
                x += 0.5 * h * v;
                v = e * v + s * normal(&mut rng);
                x += 0.5 * h * v;
                fx = -system.potential.derivative(x);
                v += 0.5 * h * fx / system.m;
                if step % run.record_every == 0 {
                    out.x.push(x);
                    out.v.push(v);
                }
            }
            out
        })
        .collect();
    Ok(TrajectoryEnsemble { seed: run.seed, dt: h, record_every: run.record_every, times, trajectories })
}

/// η(τ) for one mode per unit a′(x)a′(x′): m ω² [cos Ωτ + (γ/Ω) sin Ωτ] e^{−γτ}.
pub fn mode_kernel<T: Real>(m: T, omega: T, gamma: T, tau: T) -> T {
    let big = (omega * omega - gamma * gamma).sqrt();
    m * omega * omega * ((big * tau).cos() + gamma / big * (big * tau).sin()) * (-gamma * tau).exp()
}

/// η(x(t), x(s); t, s) given the two coordinates.
pub fn memory_kernel(bath: &[ClassicalBathMode], x_t: f64, x_s: f64, t: f64, s: f64) -> Result<f64> {
    if t < s {
        return Err(Error::NegativeTime(t - s));
    }
    Ok(bath
        .iter()
        .map(|b| mode_kernel(b.m, b.omega, b.gamma, t - s) * b.coupling.derivative(x_s) * b.coupling.derivative(x_t))
        .sum())
}

/// η̄(x, x′) = Σ 2m_μγ_μ a′_μ(x)a′_μ(x′)
pub fn markov_kernel(bath: &[ClassicalBathMode], x: f64, x_prime: f64) -> f64 {
    bath.iter().map(|b| 2.0 * b.m * b.gamma * b.coupling.derivative(x) * b.coupling.derivative(x_prime)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub err: f64,
}

impl Estimate {
    /// |a − b| within k combined standard errors.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * (self.err * self.err + other.err * other.err).sqrt()
    }
}

/// Leave-one-out jackknife of `f` applied to the component-wise mean of independent samples.
pub fn jackknife<F: Fn(&[f64]) -> f64>(samples: &[Vec<f64>], f: F) -> Result<Estimate> {
    let n = samples.len();
    if n == 0 {
        return Err(invalid("jackknife of an empty sample"));
    }
    let dim = samples[0].len();
    let mut total = vec![0.0; dim];
    for s in samples {
        for (t, x) in total.iter_mut().zip(s) {
            *t += x;
        }
    }
    let full: Vec<f64> = total.iter().map(|t| t / n as f64).collect();
    let mean = f(&full);
    if n == 1 {
        return Ok(Estimate { mean, err: f64::INFINITY });
    }
    let mut loo = vec![0.0; dim];
    let thetas: Vec<f64> = samples
        .iter()
        .map(|s| {
            for k in 0..dim {
                loo[k] = (total[k] - s[k]) / (n - 1) as f64;
            }
            f(&loo)
        })
        .collect();
    let tbar = thetas.iter().sum::<f64>() / n as f64;
    let var = thetas.iter().map(|t| (t - tbar).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    Ok(Estimate { mean, err: var.sqrt() })
}

fn jackknife_each(samples: &[Vec<f64>]) -> Result<Vec<Estimate>> {
    let dim = samples.first().map(|s| s.len()).unwrap_or(0);
    (0..dim).map(|k| jackknife(samples, |m| m[k])).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticsOptions {
    /// initial stretch dropped from every trajectory
    pub discard: f64,
    pub max_lag: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryMoments {
    pub x: Estimate,
    pub v: Estimate,
    pub x2: Estimate,
    pub v2: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStatistics {
    pub moments: StationaryMoments,
    pub lags: Vec<f64>,
    pub autocorrelation_x: Vec<Estimate>,
    pub autocorrelation_v: Vec<Estimate>,
    /// ⟨F_E(t)F_E(t+τ)⟩ of the reconstructed effective noise, composite runs only
    pub noise_correlation: Option<Vec<Estimate>>,
}

/// ⟨y(t) y(t+k)⟩ averaged over t ≥ start, for k = 0..=max_k.
fn autocorrelation(y: &[f64], start: usize, max_k: usize) -> Vec<f64> {
    (0..=max_k)
        .map(|k| {
            let n = y.len().saturating_sub(start + k);
            if n == 0 {
                return f64::NAN;
            }
            (start..start + n).map(|t| y[t] * y[t + k]).sum::<f64>() / n as f64
        })
        .collect()
}

/// F_E(t) = bath force + ∫₀ᵗ η(x(t),x(s);t,s) ẋ(s) ds, memory integral exact for piecewise-linear a′(x)ẋ.
pub fn effective_noise(traj: &Trajectory, bath: &[ClassicalBathMode], h: f64) -> Result<Vec<f64>> {
    if traj.bath_force.len() != traj.x.len() {
        return Err(invalid("trajectory has no bath-force record"));
    }
    let n = traj.x.len();
    let mut out = traj.bath_force.clone();
    for b in bath {
        let big = b.big_omega();
        let z = Complex64::new(-b.gamma, big);
        let amp = Complex64::new(b.m * b.omega * b.omega, -b.m * b.omega * b.omega * b.gamma / big);
        let e = (z * h).exp();
        let w_const = (e - 1.0) / z;
        let w_lin = (e - 1.0 - z * h) / (z * z * h);
        let g = |i: usize| b.coupling.derivative(traj.x[i]) * traj.v[i];
        let mut j = Complex64::new(0.0, 0.0);
        for i in 1..n {
            let (g0, g1) = (g(i - 1), g(i));
            j = e * j + w_const * g0 + w_lin * (g1 - g0);
            out[i] += (amp * j).re * b.coupling.derivative(traj.x[i]);
        }
    }
    Ok(out)
}

pub fn ensemble_statistics(
    ens: &TrajectoryEnsemble,
    bath: Option<&[ClassicalBathMode]>,
    opts: &StatisticsOptions,
) -> Result<EnsembleStatistics> {
    if ens.trajectories.is_empty() {
        return Err(invalid("empty ensemble"));
    }
    let hr = ens.record_dt();
    let start = (opts.discard / hr).ceil() as usize;
    let len = ens.times.len();
    if start >= len {
        return Err(invalid("discard window covers the whole trajectory"));
    }
    let max_k = ((opts.max_lag / hr).round() as usize).min(len - start - 1);
    let per_traj: Vec<Vec<f64>> = ens
        .trajectories
        .par_iter()
        .map(|t| {
            let n = (len - start) as f64;
            let xs = &t.x[start..];
            let vs = &t.v[start..];
            vec![
                xs.iter().sum::<f64>() / n,
                vs.iter().sum::<f64>() / n,
                xs.iter().map(|x| x * x).sum::<f64>() / n,
                vs.iter().map(|v| v * v).sum::<f64>() / n,
            ]
        })
        .collect();
    let m = jackknife_each(&per_traj)?;
    let moments = StationaryMoments { x: m[0], v: m[1], x2: m[2], v2: m[3] };
    let acx: Vec<Vec<f64>> = ens.trajectories.par_iter().map(|t| autocorrelation(&t.x, start, max_k)).collect();
    let acv: Vec<Vec<f64>> = ens.trajectories.par_iter().map(|t| autocorrelation(&t.v, start, max_k)).collect();
    let noise_correlation = match bath {
        Some(b) => {
            let per: Vec<Vec<f64>> = ens
                .trajectories
                .par_iter()
                .map(|t| Ok(autocorrelation(&effective_noise(t, b, hr)?, start, max_k)))
                .collect::<Result<_>>()?;
            Some(jackknife_each(&per)?)
        }
        None => None,
    };
    Ok(EnsembleStatistics {
        moments,
        lags: (0..=max_k).map(|k| k as f64 * hr).collect(),
        autocorrelation_x: jackknife_each(&acx)?,
        autocorrelation_v: jackknife_each(&acv)?,
        noise_correlation,
    })
}

/// Ensemble ⟨x²⟩(t) and ⟨v²⟩(t) at every recorded time.
pub fn time_moments(ens: &TrajectoryEnsemble) -> Result<Vec<(f64, Estimate, Estimate)>> {
    if ens.trajectories.is_empty() {
        return Err(invalid("empty ensemble"));
    }
    (0..ens.times.len())
        .map(|i| {
            let xs: Vec<Vec<f64>> = ens.trajectories.iter().map(|t| vec![t.x[i] * t.x[i], t.v[i] * t.v[i]]).collect();
            Ok((ens.times[i], jackknife(&xs, |m| m[0])?, jackknife(&xs, |m| m[1])?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> ClassicalSystemSpec {
        ClassicalSystemSpec { m: 1.0, potential: Potential::Harmonic { stiffness: 1.0 }, x0: 1.0, v0: 0.0 }
    }

    fn run(n_traj: usize, t: f64) -> LangevinRun {
        LangevinRun { temperature: t, dt: 0.01, t_end: 5.0, n_traj, seed: 7, record_every: 1, bath_init: BathInit::Fixed }
    }

    #[test]
    fn kernel_integrates_to_markov_limit() {
        let b = ClassicalBathMode::linear(1.3, 3.0, 0.7, 0.4);
        let h = 1e-3;
        let n = (40.0 / 0.7 / h) as usize;
        let integral: f64 = (0..n)
            .map(|k| {
                let t = k as f64 * h;
                0.5 * h * (mode_kernel(b.m, b.omega, b.gamma, t) + mode_kernel(b.m, b.omega, b.gamma, t + h))
            })
            .sum::<f64>()
            * 0.16;
        assert!((integral - markov_kernel(&[b], 0.0, 0.0)).abs() < 1e-5);
    }

    #[test]
    fn isolated_zero_temperature_is_conservative() {
        let e = simulate_composite_langevin(&oscillator(), &[], &run(1, 0.0)).unwrap();
        let t = &e.trajectories[0];
        let energy = |i: usize| 0.5 * t.v[i] * t.v[i] + 0.5 * t.x[i] * t.x[i];
        assert!((energy(t.x.len() - 1) - energy(0)).abs() < 1e-4);
    }

    #[test]
    fn reproducible_from_seed() {
        let bath = [ClassicalBathMode::linear(1.0, 4.0, 2.0, 0.5)];
        let a = simulate_composite_langevin(&oscillator(), &bath, &run(3, 1.0)).unwrap();
        let b = simulate_composite_langevin(&oscillator(), &bath, &run(3, 1.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_coarse_step() {
        let bath = [ClassicalBathMode::linear(1.0, 40.0, 2.0, 0.5)];
        assert!(simulate_composite_langevin(&oscillator(), &bath, &run(1, 1.0)).is_err());
    }

    #[test]
    fn jackknife_of_mean_is_standard_error() {
        let xs: Vec<Vec<f64>> = (0..10).map(|k| vec![k as f64]).collect();
        let e = jackknife(&xs, |m| m[0]).unwrap();
        let sd = (xs.iter().map(|x| (x[0] - 4.5f64).powi(2)).sum::<f64>() / 9.0).sqrt();
        assert!((e.mean - 4.5).abs() < 1e-14);
        assert!((e.err - sd / 10f64.sqrt()).abs() < 1e-12);
    }
}
