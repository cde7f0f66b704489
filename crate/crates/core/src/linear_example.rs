//! Harmonic system linearly coupled to damped bath oscillators, U_I = Σ Cₙ Q ⊗ qₙ.

use serde::{Deserialize, Serialize};

use crate::damped_oscillator::{Constants, OscillatorParams};
use crate::error::{invalid, Error, Result};
use crate::lindblad_core::{fock_operators, Operator};
use crate::scalar::Real;
use crate::spectral_functions::spectral_pair_closed;
use crate::weak_coupling::{CouplingTerm, FrequencySector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct BathCoupling<T> {
    pub c: T,
    pub mode: OscillatorParams<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct LinearModelSpec<T> {
    pub m_s: T,
    pub omega_s: T,
    pub bath: Vec<BathCoupling<T>>,
}

impl<T: Real> LinearModelSpec<T> {
    pub fn validated(&self) -> Result<&Self> {
        if !(self.m_s > T::zero() && self.omega_s > T::zero()) {
            return Err(invalid("system mass and frequency must be positive"));
        }
        for (n, b) in self.bath.iter().enumerate() {
            if !b.c.is_finite() {
                return Err(invalid(format!("bath mode {n}: coupling is not finite")));
            }
            b.mode.validated().map_err(|e| invalid(format!("bath mode {n}: {e}")))?;
            if b.mode.constants != self.bath[0].mode.constants {
                return Err(invalid(format!("bath mode {n}: physical constants differ from mode 0")));
            }
        }
        Ok(self)
    }

    /// ħ shared by every bath mode (the default when the bath is empty).
    pub fn hbar(&self) -> Result<T> {
        Ok(self.constants()?.hbar)
    }

    pub fn constants(&self) -> Result<Constants<T>> {
        Ok(self.bath.first().map(|b| b.mode.constants).unwrap_or_default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoefficients<T> {
    pub delta_omega_s: T,
    pub delta_e: T,
    pub lambda_eff: T,
    pub d_pp_eff: T,
    pub d_qq_eff: T,
}

impl<T: Real> EffectiveCoefficients<T> {
    /// False when the effective friction is not positive; the reduced dynamics then does not relax.
    pub fn is_damping(&self) -> bool {
        self.lambda_eff > T::zero()
    }

    /// Effective SNS parameters of the system with μ = 0 and D_pq = 0.
    pub fn as_oscillator(&self, m_s: T, omega_s: T, constants: Constants<T>) -> OscillatorParams<T> {
        OscillatorParams {
            m: m_s,
            omega: omega_s,
            lambda: self.lambda_eff,
            mu: T::zero(),
            d_qq: self.d_qq_eff,
            d_pp: self.d_pp_eff,
            d_pq: T::zero(),
            constants,
        }
    }
}

/// Σₙ-form coefficients from h and S at ±ω_S.
pub fn effective_coefficients<T: Real>(spec: &LinearModelSpec<T>) -> Result<EffectiveCoefficients<T>> {
    spec.validated()?;
    let hbar = spec.hbar()?;
    let (ms, ws) = (spec.m_s, spec.omega_s);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut out = EffectiveCoefficients {
        delta_omega_s: T::zero(),
        delta_e: T::zero(),
        lambda_eff: T::zero(),
        d_pp_eff: T::zero(),
        d_qq_eff: T::zero(),
    };
    for b in &spec.bath {
        let up = spectral_pair_closed(&b.mode, ws)?;
        let down = spectral_pair_closed(&b.mode, -ws)?;
        let c2 = b.c * b.c;
        out.delta_omega_s = out.delta_omega_s + c2 * (up.s + down.s) / (two * ms * ws * hbar);
        out.delta_e = out.delta_e + c2 * (up.s - down.s) / (four * ms * ws);
        out.lambda_eff = out.lambda_eff + c2 * (down.h - up.h) / (two * hbar * ms * ws);
        out.d_pp_eff = out.d_pp_eff + c2 / four * (up.h + down.h);
    }
    out.d_qq_eff = out.d_pp_eff / ((ms * ws) * (ms * ws));
    Ok(out)
}

/// Temperature of a mode from the Gibbs family, or an error when the mode is not of that form.
pub fn gibbs_temperature<T: Real>(p: &OscillatorParams<T>) -> Result<T> {
    let p = p.validated()?;
    let (hbar, kb) = (p.constants.hbar, p.constants.k_b);
    let two = T::lit(2.0);
    let tol = T::lit(1e-9);
    let not_gibbs = |why: &str| Error::InvalidParams(format!("bath mode is not of the Gibbs family: {why}"));
    if p.d_pq.abs() > tol * (p.d_qq * p.d_pp).sqrt() {
        return Err(not_gibbs("D_pq ≠ 0"));
    }
    let coth = two * p.d_pp / ((p.lambda + p.mu) * hbar * p.m * p.omega);
    let d_qq = (p.lambda - p.mu) / two * hbar / (p.m * p.omega) * coth;
    if (d_qq - p.d_qq).abs() > tol * p.d_qq.abs() {
        return Err(not_gibbs("D_qq and D_pp imply different temperatures"));
    }
    if !(coth > T::one()) {
        return Err(not_gibbs("coth(ħω/2kT) must exceed 1"));
    }
    Ok(hbar * p.omega / (two * kb * coth.recip().atanh()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceCoefficients<T> {
    pub lambda_eff: T,
    pub d_pp_eff: T,
    pub d_qq_eff: T,
    pub delta_omega_s: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeDeviation<T> {
    pub lambda_eff: T,
    pub d_pp_eff: T,
    pub delta_omega_s: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalCoefficients<T> {
    pub full: EffectiveCoefficients<T>,
    pub resonance: ResonanceCoefficients<T>,
    pub temperatures: Vec<T>,
    /// |resonance − full| / |full| per coefficient
    pub deviation: RelativeDeviation<T>,
}

/// Thermal-bath closed forms and their near-resonance (Lorentzian) approximation.
pub fn thermal_weak_damping_coefficients<T: Real>(spec: &LinearModelSpec<T>) -> Result<ThermalCoefficients<T>> {
    spec.validated()?;
    let constants = spec.constants()?;
    let hbar = constants.hbar;
    let (ms, ws) = (spec.m_s, spec.omega_s);
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    let mut full = EffectiveCoefficients {
        delta_omega_s: T::zero(),
        delta_e: effective_coefficients(spec)?.delta_e,
        lambda_eff: T::zero(),
        d_pp_eff: T::zero(),
        d_qq_eff: T::zero(),
    };
    let mut res = ResonanceCoefficients { lambda_eff: T::zero(), d_pp_eff: T::zero(), d_qq_eff: T::zero(), delta_omega_s: T::zero() };
    let mut temperatures = Vec::with_capacity(spec.bath.len());
    for b in &spec.bath {
        let p = &b.mode;
        let t = gibbs_temperature(p)?;
        temperatures.push(t);
        let (l, mu, m, w) = (p.lambda, p.mu, p.m, p.omega);
        let om = p.big_omega();
        let c2 = b.c * b.c;
        let den = (l * l + (om - ws) * (om - ws)) * (l * l + (om + ws) * (om + ws));
        let coth = (hbar * w / (two * constants.k_b * t)).coth();
        full.lambda_eff = full.lambda_eff + c2 * l / (m * ms * den);
        full.d_pp_eff = full.d_pp_eff
            + c2 * hbar * coth * ((l + mu) * (l * l + om * om) + (l - mu) * ws * ws) / (four * m * w * den);
        full.delta_omega_s = full.delta_omega_s - c2 * (l * l + om * om - ws * ws) / (two * m * ms * ws * den);

        let detune = w - ws;
        let lorentz = l * l + detune * detune;
        let lam_n = c2 * l / (four * m * ms * ws * ws * lorentz);
        res.lambda_eff = res.lambda_eff + lam_n;
        res.d_pp_eff = res.d_pp_eff + hbar * ms * ws / two * (hbar * ws / (two * constants.k_b * t)).coth() * lam_n;
        res.delta_omega_s = res.delta_omega_s - c2 * detune / (four * m * ms * ws * ws * lorentz);
    }
    let mw2 = (ms * ws) * (ms * ws);
    full.d_qq_eff = full.d_pp_eff / mw2;
    res.d_qq_eff = res.d_pp_eff / mw2;
    let rel = |a: T, b: T| if b == T::zero() { (a - b).abs() } else { ((a - b) / b).abs() };
    let deviation = RelativeDeviation {
        lambda_eff: rel(res.lambda_eff, full.lambda_eff),
        d_pp_eff: rel(res.d_pp_eff, full.d_pp_eff),
        delta_omega_s: rel(res.delta_omega_s, full.delta_omega_s),
    };
    Ok(ThermalCoefficients { full, resonance: res, temperatures, deviation })
}

/// ħω_S(N + ½) on the d-level truncation.
pub fn system_hamiltonian(spec: &LinearModelSpec<f64>, d: usize) -> Result<Operator> {
    let hbar = spec.hbar()?;
    if d < 2 {
        return Err(Error::Dimension(format!("Fock truncation needs d >= 2, got {d}")));
    }
    Ok(Operator::diagonal(&(0..d).map(|n| hbar * spec.omega_s * (n as f64 + 0.5)).collect::<Vec<_>>()))
}

/// The truncated system coordinate Q.
pub fn system_position(spec: &LinearModelSpec<f64>, d: usize) -> Result<Operator> {
    Ok(fock_operators(d, spec.m_s, spec.omega_s, spec.constants()?)?.q)
}

/// Coupling terms Cₙ Q for the generic weak-coupling builders.
pub fn linear_couplings(spec: &LinearModelSpec<f64>, d: usize) -> Result<Vec<CouplingTerm>> {
    spec.validated()?;
    let q = system_position(spec, d)?;
    spec.bath.iter().map(|b| CouplingTerm::new(q.scale_re(b.c), b.mode)).collect()
}

/// Per mode: [sector at −ω_S ∝ a, sector at +ω_S ∝ a†].
pub fn linear_model_sectors(spec: &LinearModelSpec<f64>, d: usize) -> Result<Vec<[FrequencySector; 2]>> {
    spec.validated()?;
    let constants = spec.constants()?;
    let f = fock_operators(d, spec.m_s, spec.omega_s, constants)?;
    let k = (constants.hbar / (2.0 * spec.m_s * spec.omega_s)).sqrt();
    Ok(spec
        .bath
        .iter()
        .map(|b| {
            [
                FrequencySector { delta_omega: -spec.omega_s, v_sector: f.a.scale_re(b.c * k) },
                FrequencySector { delta_omega: spec.omega_s, v_sector: f.a_dagger.scale_re(b.c * k) },
            ]
        })
        .collect())
}

/// Bose–Einstein occupancy 1/(e^{ħω/kT} − 1).
pub fn bose_occupancy<T: Real>(omega: T, t: T, constants: Constants<T>) -> T {
    ((constants.hbar * omega / (constants.k_b * t)).exp() - T::one()).recip()
}

/// Modes with ω uniform over [lo, hi]·ω_S and a common coupling, all Gibbs at `t`.
#[allow(clippy::too_many_arguments)]
pub fn discretized_thermal_bath(
    m_s: f64,
    omega_s: f64,
    n_modes: usize,
    band: (f64, f64),
    coupling: f64,
    mode_mass: f64,
    lambda_over_omega: f64,
    t: f64,
    constants: Constants<f64>,
) -> Result<LinearModelSpec<f64>> {
    if n_modes == 0 {
        return Err(invalid("bath needs at least one mode"));
    }
    let bath = (0..n_modes)
        .map(|k| {
            let frac = if n_modes == 1 { 0.5 } else { k as f64 / (n_modes - 1) as f64 };
            let w = omega_s * (band.0 + (band.1 - band.0) * frac);
            let mode = crate::damped_oscillator::gibbs_params(mode_mass, w, lambda_over_omega * w, 0.0, t, constants)?;
            Ok(BathCoupling { c: coupling, mode })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinearModelSpec { m_s, omega_s, bath })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damped_oscillator::gibbs_params;

    fn single(c: f64, lambda: f64, w: f64, t: f64) -> LinearModelSpec<f64> {
        let mode = gibbs_params(1.0, w, lambda, 0.0, t, Constants::default()).unwrap();
        LinearModelSpec { m_s: 1.0, omega_s: 1.0, bath: vec![BathCoupling { c, mode }] }
    }

    #[test]
    fn thermal_forms_equal_general_forms() {
        for &(w, mu) in &[(1.0, 0.0), (1.3, 0.05), (0.6, -0.02)] {
            let mode: OscillatorParams<f64> = gibbs_params(1.2, w, 0.1, mu, 2.0, Constants::default()).unwrap();
            let spec = LinearModelSpec { m_s: 0.8, omega_s: 1.0, bath: vec![BathCoupling { c: 0.3, mode }] };
            let g = effective_coefficients(&spec).unwrap();
            let t = thermal_weak_damping_coefficients(&spec).unwrap();
            assert!((gibbs_temperature(&mode).unwrap() - 2.0).abs() < 1e-12);
            let pairs: [(f64, f64); 3] =
                [(g.lambda_eff, t.full.lambda_eff), (g.d_pp_eff, t.full.d_pp_eff), (g.delta_omega_s, t.full.delta_omega_s)];
            for (a, b) in pairs {
                assert!((a - b).abs() < 1e-12 * b.abs().max(1e-12), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn weak_damping_resonance() {
        let spec = single(0.01, 0.01, 1.0, 1.0);
        let g = effective_coefficients(&spec).unwrap();
        let approx = 0.01f64.powi(2) / (4.0 * 0.01);
        assert!(((g.lambda_eff - approx) / approx).abs() < 0.05);
        let t = thermal_weak_damping_coefficients(&spec).unwrap();
        assert!(t.deviation.lambda_eff < 1e-3);
        let ratio = t.resonance.d_pp_eff / t.resonance.lambda_eff;
        assert!((ratio - 0.5 * (0.5f64).tanh().recip()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_gibbs_mode() {
        let mut spec = single(0.1, 0.1, 1.0, 1.0);
        spec.bath[0].mode.d_qq *= 1.5;
        assert!(thermal_weak_damping_coefficients(&spec).is_err());
        assert!(effective_coefficients(&spec).is_ok());
    }

    #[test]
    fn sectors_scale_ladder_operators() {
        let spec = single(0.4, 0.1, 1.0, 1.0);
        let s = linear_model_sectors(&spec, 5).unwrap();
        let f = fock_operators(5, 1.0, 1.0, Constants::default()).unwrap();
        assert!((&s[0][1].v_sector - &f.a_dagger.scale_re(0.4 * 0.5f64.sqrt())).max_abs() < 1e-15);
    }
}
