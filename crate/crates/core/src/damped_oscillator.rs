//! Single damped bath oscillator: parameters, named families, moment flows and
//! the stationary two-time correlation.

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants<T> {
    pub hbar: T,
    pub k_b: T,
}

impl<T: Real> Default for Constants<T> {
    fn default() -> Self {
        Constants { hbar: T::one(), k_b: T::one() }
    }
}

impl<T: Real> Constants<T> {
    pub fn new(hbar: T, k_b: T) -> Result<Self> {
        if !(hbar > T::zero() && k_b > T::zero()) {
            return Err(invalid("hbar and k_B must be strictly positive"));
        }
        Ok(Constants { hbar, k_b })
    }
}

/// One damped mode. Fields are public so fixtures can be built unchecked;
/// pass through [`OscillatorParams::validated`] for the checked path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct OscillatorParams<T> {
    pub m: T,
    pub omega: T,
    pub lambda: T,
    pub mu: T,
    pub d_qq: T,
    pub d_pp: T,
    pub d_pq: T,
    #[serde(default)]
    pub constants: Constants<T>,
}

impl<T: Real> OscillatorParams<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new_unchecked(m: T, omega: T, lambda: T, mu: T, d_qq: T, d_pp: T, d_pq: T) -> Self {
        OscillatorParams { m, omega, lambda, mu, d_qq, d_pp, d_pq, constants: Constants::default() }
    }

    pub fn with_constants(mut self, constants: Constants<T>) -> Self {
        self.constants = constants;
        self
    }

    pub fn validated(self) -> Result<Self> {
        let report = validate_params(&self);
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(report.to_string()))
        }
    }

    /// Ω = √(ω² − μ²); NaN when the mode is not underdamped.
    pub fn big_omega(&self) -> T {
        (self.omega * self.omega - self.mu * self.mu).sqrt()
    }

    /// D_qq·D_pp − D_pq² − (λħ/2)².
    pub fn determinant_slack(&self) -> T {
        let half = self.lambda * self.constants.hbar / T::lit(2.0);
        self.d_qq * self.d_pp - self.d_pq * self.d_pq - half * half
    }

    fn checked_big_omega(&self) -> Result<T> {
        let w = self.big_omega();
        if w > T::zero() {
            Ok(w)
        } else {
            Err(invalid("mode is not underdamped (ω ≤ |μ|)"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    PositiveMass,
    PositiveFrequency,
    PositiveDqq,
    PositiveDpp,
    DeterminantBound,
    Underdamping,
    Relaxation,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::PositiveMass => "m>0",
            Constraint::PositiveFrequency => "omega>0",
            Constraint::PositiveDqq => "D_qq>0",
            Constraint::PositiveDpp => "D_pp>0",
            Constraint::DeterminantBound => "D_qq*D_pp-D_pq^2>=(lambda*hbar/2)^2",
            Constraint::Underdamping => "omega>|mu|",
            Constraint::Relaxation => "lambda>|mu|",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Constraint>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, c: Constraint) -> bool {
        self.violations.contains(&c)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        let labels: Vec<String> = self.violations.iter().map(|c| c.to_string()).collect();
        write!(f, "violated: {}", labels.join(", "))
    }
}

pub fn validate_params<T: Real>(p: &OscillatorParams<T>) -> ValidationReport {
    let mut violations = Vec::new();
    let zero = T::zero();
    if !(p.m > zero) {
        violations.push(Constraint::PositiveMass);
    }
    if !(p.omega > zero) {
        violations.push(Constraint::PositiveFrequency);
    }
    if !(p.d_qq > zero) {
        violations.push(Constraint::PositiveDqq);
    }
    if !(p.d_pp > zero) {
        violations.push(Constraint::PositiveDpp);
    }
    // saturating families (persistent-pure) hit the bound up to rounding
    let half = p.lambda * p.constants.hbar / T::lit(2.0);
    let scale = (p.d_qq * p.d_pp).abs().max(half * half).max(p.d_pq * p.d_pq);
    let tol = T::epsilon() * T::lit(64.0) * scale;
    if !(p.determinant_slack() >= -tol) {
        violations.push(Constraint::DeterminantBound);
    }
    if !(p.omega > p.mu.abs()) {
        violations.push(Constraint::Underdamping);
    }
    if !(p.lambda > p.mu.abs()) {
        violations.push(Constraint::Relaxation);
    }
    ValidationReport { violations }
}

/// Diffusion coefficients whose asymptotic state is the Gibbs state at temperature `t`.
pub fn gibbs_params<T: Real>(
    m: T,
    omega: T,
    lambda: T,
    mu: T,
    t: T,
    constants: Constants<T>,
) -> Result<OscillatorParams<T>> {
    if !(t > T::zero()) {
        return Err(invalid("temperature must be positive"));
    }
    if !(lambda > mu.abs()) {
        return Err(invalid("Gibbs family needs lambda > |mu|"));
    }
    let two = T::lit(2.0);
    let c = (constants.hbar * omega / (two * constants.k_b * t)).coth();
    let p = OscillatorParams {
        m,
        omega,
        lambda,
        mu,
        d_qq: (lambda - mu) / two * constants.hbar / (m * omega) * c,
        d_pp: (lambda + mu) / two * constants.hbar * m * omega * c,
        d_pq: T::zero(),
        constants,
    };
    p.validated().map_err(|e| match e {
        Error::InvalidParams(msg) => Error::InvalidParams(format!(
            "Gibbs family inadmissible at this temperature ({msg}); needs coth(ħω/2kT) ≥ λ/√(λ²−μ²)"
        )),
        other => other,
    })
}

/// Diffusion saturating the determinant bound; admits persistent pure states.
/// Not a relaxing-environment parameter set.
pub fn persistent_pure_params<T: Real>(
    m: T,
    omega: T,
    lambda: T,
    mu: T,
    constants: Constants<T>,
) -> Result<OscillatorParams<T>> {
    if !(omega > mu.abs()) {
        return Err(invalid("persistent-pure family needs omega > |mu|"));
    }
    let w = (omega * omega - mu * mu).sqrt();
    let two = T::lit(2.0);
    let hl = constants.hbar * lambda / (two * w);
    Ok(OscillatorParams {
        m,
        omega,
        lambda,
        mu,
        d_qq: hl / m,
        d_pp: hl * m * omega * omega,
        d_pq: -hl * mu,
        constants,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentState<T> {
    pub mean_q: T,
    pub mean_p: T,
    pub qq: T,
    pub pp: T,
    pub s_pq: T,
}

impl<T: Real> MomentState<T> {
    /// qq·pp − s_pq² − ħ²/4 computed on raw second moments.
    pub fn uncertainty_slack(&self, hbar: T) -> T {
        self.qq * self.pp - self.s_pq * self.s_pq - hbar * hbar / T::lit(4.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        [
            self.mean_q - other.mean_q,
            self.mean_p - other.mean_p,
            self.qq - other.qq,
            self.pp - other.pp,
            self.s_pq - other.s_pq,
        ]
        .iter()
        .fold(T::zero(), |acc, d| acc.max(d.abs()))
    }
}

pub fn asymptotic_moments<T: Real>(p: &OscillatorParams<T>) -> Result<MomentState<T>> {
    let p = p.validated()?;
    let (m, w, l, mu) = (p.m, p.omega, p.lambda, p.mu);
    let two = T::lit(2.0);
    let den = two * l * (l * l + w * w - mu * mu);
    let pp = (m * m * w.powi(4) * p.d_qq + (two * l * (l - mu) + w * w) * p.d_pp
        - two * m * w * w * (l - mu) * p.d_pq)
        / den;
    let qq = (m * m * (two * l * (l + mu) + w * w) * p.d_qq + p.d_pp + two * m * (l + mu) * p.d_pq)
        / (den * m * m);
    let s_pq = ((l - mu) * p.d_pp - (l + mu) * m * m * w * w * p.d_qq + two * m * (l * l - mu * mu) * p.d_pq)
        / (den * m);
    Ok(MomentState { mean_q: T::zero(), mean_p: T::zero(), qq, pp, s_pq })
}

/// e^{At} for the first-moment drift A = [[−(λ−μ), 1/m], [−mω², −(λ+μ)]].
fn flow_matrix<T: Real>(p: &OscillatorParams<T>, w: T, t: T) -> [[T; 2]; 2] {
    let env = (-p.lambda * t).exp();
    let (s, c) = (w * t).sin_cos();
    let sw = s / w;
    [
        [env * (c + p.mu * sw), env * sw / p.m],
        [-env * p.m * p.omega * p.omega * sw, env * (c - p.mu * sw)],
    ]
}

pub fn evolve_moments<T: Real>(p: &OscillatorParams<T>, m0: &MomentState<T>, t: T) -> Result<MomentState<T>> {
    if !(t >= T::zero()) {
        return Err(Error::NegativeTime(t.to_f64().unwrap_or(f64::NAN)));
    }
    let w = p.checked_big_omega()?;
    let phi = flow_matrix(p, w, t);
    let mean_q = phi[0][0] * m0.mean_q + phi[0][1] * m0.mean_p;
    let mean_p = phi[1][0] * m0.mean_q + phi[1][1] * m0.mean_p;

    let sigma0 = [[m0.qq, m0.s_pq], [m0.s_pq, m0.pp]];
    let mut sigma = congruence(&phi, &sigma0);

    // 2∫₀ᵗ Φ(s) D Φ(s)ᵀ ds in closed form, with Φ(s) = e^{−λs}(cos Ωs I + sin Ωs/Ω B), B = A + λI
    let two = T::lit(2.0);
    let l = p.lambda;
    let d = [[p.d_qq, p.d_pq], [p.d_pq, p.d_pp]];
    let b = [[p.mu, T::one() / p.m], [-p.m * p.omega * p.omega, -p.mu]];
    let bd = matmul(&b, &d);
    let bdbt = matmul(&bd, &transpose(&b));
    let bd_sym = add(&bd, &transpose(&bd));

    let decay = (-two * l * t).exp();
    let i0 = if l == T::zero() { t } else { -(-two * l * t).exp_m1() / (two * l) };
    let (s2, c2) = (two * w * t).sin_cos();
    let k = T::lit(4.0) * (l * l + w * w);
    let ic = (two * l - decay * (two * l * c2 - two * w * s2)) / k;
    let is = (two * w - decay * (two * l * s2 + two * w * c2)) / k;
    let int_cc = (i0 + ic) / two;
    let int_ss = (i0 - ic) / two;
    let int_sc = is / two;
    for i in 0..2 {
        for j in 0..2 {
            sigma[i][j] = sigma[i][j]
                + two * (int_cc * d[i][j] + int_sc / w * bd_sym[i][j] + int_ss / (w * w) * bdbt[i][j]);
        }
    }
    Ok(MomentState { mean_q, mean_p, qq: sigma[0][0], pp: sigma[1][1], s_pq: (sigma[0][1] + sigma[1][0]) / two })
}

pub fn heisenberg_q_coefficients<T: Real>(p: &OscillatorParams<T>, t: T) -> Result<(T, T)> {
    if !(t >= T::zero()) {
        return Err(Error::NegativeTime(t.to_f64().unwrap_or(f64::NAN)));
    }
    let w = p.checked_big_omega()?;
    let phi = flow_matrix(p, w, t);
    Ok((phi[0][0], phi[0][1]))
}

/// ⟨q(t) q⟩ in the asymptotic state.
pub fn bath_correlation<T: Real>(p: &OscillatorParams<T>, t: T) -> Result<Complex<T>> {
    if !(t >= T::zero()) {
        return Err(Error::NegativeTime(t.to_f64().unwrap_or(f64::NAN)));
    }
    let asym = asymptotic_moments(p)?;
    Ok(correlation_from_moments(p, &asym, t))
}

pub(crate) fn correlation_from_moments<T: Real>(p: &OscillatorParams<T>, asym: &MomentState<T>, t: T) -> Complex<T> {
    let w = p.big_omega();
    let env = (-p.lambda * t).exp();
    let (s, c) = (w * t).sin_cos();
    let two = T::lit(2.0);
    let re = asym.qq * (c + p.mu / w * s) * env + two * asym.s_pq / (two * p.m * w) * s * env;
    let im = -p.constants.hbar / (two * p.m * w) * s * env;
    Complex::new(re, im)
}

/// Envelope constant C with |⟨q(t)q⟩| ≤ C e^{−λt}.
pub fn correlation_bound<T: Real>(p: &OscillatorParams<T>) -> Result<T> {
    let a = asymptotic_moments(p)?;
    let w = p.big_omega();
    let two = T::lit(2.0);
    Ok(a.qq.abs() + (two * a.s_pq.abs() + p.constants.hbar) * (T::one() + p.mu.abs() / w) / (two * p.m * w))
}

/// Draw a random parameter set that passes [`validate_params`]; used by property tests and the validate scenario.
pub fn sample_valid_params<R: Rng + ?Sized>(rng: &mut R) -> OscillatorParams<f64> {
    let hbar = 1.0;
    let m = rng.gen_range(0.5..2.0);
    let omega: f64 = rng.gen_range(0.5..2.0);
    let lambda = omega * rng.gen_range(0.01..0.8);
    let mu = lambda.min(omega) * rng.gen_range(-0.9..0.9);
    let d_qq = hbar / (m * omega) * rng.gen_range(0.05..2.0);
    let corr = rng.gen_range(-0.5..0.5);
    // D_pq² = corr²·D_qq·D_pp keeps the sign pattern free while the bound fixes D_pp from below
    let floor = (lambda * hbar / 2.0).powi(2) / (d_qq * (1.0 - corr * corr));
    let d_pp = floor * (1.0 + rng.gen_range(0.0..3.0)) + 1e-3 * hbar * m * omega;
    let d_pq = corr * (d_qq * d_pp).sqrt();
    OscillatorParams::new_unchecked(m, omega, lambda, mu, d_qq, d_pp, d_pq)
}

fn matmul<T: Real>(a: &[[T; 2]; 2], b: &[[T; 2]; 2]) -> [[T; 2]; 2] {
    let mut out = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn transpose<T: Real>(a: &[[T; 2]; 2]) -> [[T; 2]; 2] {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn add<T: Real>(a: &[[T; 2]; 2], b: &[[T; 2]; 2]) -> [[T; 2]; 2] {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

fn congruence<T: Real>(phi: &[[T; 2]; 2], s: &[[T; 2]; 2]) -> [[T; 2]; 2] {
    matmul(&matmul(phi, s), &transpose(phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn thermal() -> OscillatorParams<f64> {
        gibbs_params(1.0, 1.0, 0.1, 0.0, 1.0, Constants::default()).unwrap()
    }

    #[test]
    fn gibbs_mu_zero_relations() {
        let p = thermal();
        let c = (0.5f64).tanh().recip();
        assert_relative_eq!(p.d_pp, 0.05 * c, max_relative = 1e-14);
        assert_relative_eq!(p.d_qq, p.d_pp, max_relative = 1e-14);
        assert_eq!(p.d_pq, 0.0);
    }

    #[test]
    fn gibbs_high_temperature_limit() {
        let p = gibbs_params(1.0, 1.0, 0.1, 0.0, 1e6, Constants::default()).unwrap();
        assert_relative_eq!(p.d_pp / (p.constants.k_b * 1e6), 0.1 * 1.0, max_relative = 1e-9);
    }

    #[test]
    fn gibbs_rejects_low_temperature_with_mu() {
        assert!(gibbs_params(1.0, 1.0, 0.2, 0.1, 0.05, Constants::default()).is_err());
        assert!(gibbs_params(1.0, 1.0, 0.1, 0.1, 1.0, Constants::default()).is_err());
    }

    #[test]
    fn determinant_violation_reported() {
        let mut p = thermal();
        p.d_pq = 0.0;
        let target = (p.lambda / 2.0).powi(2) * 0.99;
        p.d_pp = target / p.d_qq;
        let r = validate_params(&p);
        assert_eq!(r.violations, vec![Constraint::DeterminantBound]);
    }

    #[test]
    fn underdamping_violation_reported() {
        let mut p = thermal();
        p.mu = p.omega;
        let r = validate_params(&p);
        assert!(r.contains(Constraint::Underdamping));
    }

    #[test]
    fn persistent_pure_saturates() {
        let p = persistent_pure_params(1.3, 1.1, 0.2, 0.15, Constants::default()).unwrap();
        assert_relative_eq!(p.determinant_slack(), 0.0, epsilon = 1e-15);
        assert!(validate_params(&p).is_valid());
        let p0 = persistent_pure_params(1.0, 2.0, 0.2, 0.0, Constants::default()).unwrap();
        assert_eq!(p0.d_pq, 0.0);
        assert_relative_eq!(p0.d_qq, 0.2 / (2.0 * 2.0), max_relative = 1e-15);
    }

    #[test]
    fn gibbs_asymptotics_are_thermal() {
        for &mu in &[0.0, 0.05] {
            let p = gibbs_params(1.4, 0.8, 0.1, mu, 2.0, Constants::default()).unwrap();
            let a = asymptotic_moments(&p).unwrap();
            let c = (0.8f64 / 4.0).tanh().recip();
            assert_relative_eq!(a.pp, 1.4 * 0.8 / 2.0 * c, max_relative = 1e-13);
            assert_relative_eq!(a.qq, c / (2.0 * 1.4 * 0.8), max_relative = 1e-13);
            assert!(a.s_pq.abs() < 1e-14);
        }
    }

    #[test]
    fn evolve_identity_and_rotation() {
        let p = thermal();
        let m0 = MomentState { mean_q: 0.3, mean_p: -0.2, qq: 0.8, pp: 0.7, s_pq: 0.1 };
        let same = evolve_moments(&p, &m0, 0.0).unwrap();
        assert!(same.max_abs_diff(&m0) < 1e-15);

        let free = OscillatorParams::new_unchecked(2.0, 1.5, 0.0, 0.0, 0.0, 0.0, 0.0);
        let e0 = m0.qq * 2.0 * 1.5 * 1.5 + m0.pp / 2.0;
        for &t in &[0.3, 1.7, 10.0] {
            let mt = evolve_moments(&free, &m0, t).unwrap();
            let et = mt.qq * 2.0 * 1.5 * 1.5 + mt.pp / 2.0;
            assert_relative_eq!(et, e0, max_relative = 1e-13);
        }
        assert!(evolve_moments(&p, &m0, -1.0).is_err());
    }

    #[test]
    fn evolve_reaches_asymptote() {
        let p = OscillatorParams::new_unchecked(1.2, 0.9, 0.15, 0.05, 0.4, 0.6, 0.1);
        assert!(validate_params(&p).is_valid());
        let m0 = MomentState { mean_q: 1.0, mean_p: 0.5, qq: 2.0, pp: 1.0, s_pq: 0.3 };
        let late = evolve_moments(&p, &m0, 40.0 / (p.lambda - p.mu)).unwrap();
        let a = asymptotic_moments(&p).unwrap();
        assert!(late.max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn heisenberg_at_zero() {
        let p = thermal();
        assert_eq!(heisenberg_q_coefficients(&p, 0.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn correlation_edge_values() {
        let p = OscillatorParams::new_unchecked(1.2, 0.9, 0.15, 0.05, 0.4, 0.6, 0.1);
        let a = asymptotic_moments(&p).unwrap();
        let c0 = bath_correlation(&p, 0.0).unwrap();
        assert_eq!(c0.re, a.qq);
        assert_eq!(c0.im, 0.0);
        let w = p.big_omega();
        let t = std::f64::consts::PI / (2.0 * w);
        let ct = bath_correlation(&p, t).unwrap();
        assert_relative_eq!(ct.im, -(-p.lambda * t).exp() / (2.0 * p.m * w), max_relative = 1e-14);
    }

    #[test]
    fn generic_over_f32() {
        let p = gibbs_params(1.0f32, 1.0, 0.1, 0.0, 1.0, Constants::default()).unwrap();
        let a = asymptotic_moments(&p).unwrap();
        let c = (0.5f32).tanh().recip();
        assert!((a.pp - c / 2.0).abs() < 1e-5);
    }

    #[test]
    fn sampled_params_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let p = sample_valid_params(&mut rng);
            assert!(validate_params(&p).is_valid(), "{p:?}");
        }
    }
}
