//! Half-line Fourier transform h(Δω) + iS(Δω) = ∫₀^∞ e^{−iΔω s}⟨q(s)q⟩ ds of the bath
//! correlation, in closed form and by direct quadrature.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::damped_oscillator::{asymptotic_moments, correlation_bound, correlation_from_moments, OscillatorParams};
use crate::error::{invalid, Result};
use crate::quadrature;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair<T> {
    pub h: T,
    pub s: T,
    pub delta_omega: T,
}

impl<T: Real> SpectralPair<T> {
    pub fn as_complex(&self) -> Complex<T> {
        Complex::new(self.h, self.s)
    }

    /// |Γ₁ − Γ₂| / |Γ₁| on the complex value Γ = h + iS.
    pub fn relative_error(&self, reference: &Self) -> T {
        let r = reference.as_complex();
        (self.as_complex() - r).norm() / r.norm()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureEstimate<T> {
    pub pair: SpectralPair<T>,
    /// upper end of the integration range, 40/λ
    pub t_max: T,
    /// bound on the neglected tail, C·e^{−λ t_max}/λ
    pub truncation_bound: T,
    pub error_estimate: T,
    pub evaluations: usize,
    pub converged: bool,
}

/// [λ² + (Ω+Δω)²][λ² + (Ω−Δω)²]
fn denominator<T: Real>(l: T, w: T, d: T) -> T {
    (l * l + (w + d) * (w + d)) * (l * l + (w - d) * (w - d))
}

/// Coefficients (a, b, c) of the h numerator aΔω² + bΔω + c; h = numerator / (m²·den).
pub fn h_numerator_coefficients<T: Real>(p: &OscillatorParams<T>) -> (T, T, T) {
    let m = p.m;
    let lm = p.lambda + p.mu;
    let a = m * m * p.d_qq;
    let b = -m * p.lambda * p.constants.hbar;
    let c = m * m * lm * lm * p.d_qq + p.d_pp + T::lit(2.0) * m * lm * p.d_pq;
    (a, b, c)
}

/// Coefficients c₀..c₃ of the S numerator; S = Σ cₖΔωᵏ / (2λm²(λ²+Ω²)·den).
pub fn s_numerator_coefficients<T: Real>(p: &OscillatorParams<T>) -> [T; 4] {
    let (m, l, mu, hbar) = (p.m, p.lambda, p.mu, p.constants.hbar);
    let w = p.big_omega();
    let two = T::lit(2.0);
    let r = l * l + w * w;
    let lm = l + mu;
    let y0 = m * m * lm * lm * p.d_qq + p.d_pp + two * lm * m * p.d_pq;
    let c0 = -hbar * m * l * r * r;
    let c1 = (w * w - T::lit(3.0) * l * l) * y0 + r * r * m * m * p.d_qq;
    let c2 = hbar * l * m * r;
    let c3 = -(y0 + m * m * r * p.d_qq);
    [c0, c1, c2, c3]
}

pub fn spectral_pair_closed<T: Real>(p: &OscillatorParams<T>, delta_omega: T) -> Result<SpectralPair<T>> {
    let p = p.validated()?;
    let d = delta_omega;
    let (l, m) = (p.lambda, p.m);
    let w = p.big_omega();
    let den = denominator(l, w, d);
    let (a, b, c) = h_numerator_coefficients(&p);
    let h = (a * d * d + b * d + c) / (m * m * den);
    let k = s_numerator_coefficients(&p);
    let s = (k[0] + d * (k[1] + d * (k[2] + d * k[3]))) / (T::lit(2.0) * l * m * m * (l * l + w * w) * den);
    Ok(SpectralPair { h, s, delta_omega })
}

pub fn spectral_pair_quadrature<T: Real>(
    p: &OscillatorParams<T>,
    delta_omega: T,
    rel_tol: T,
) -> Result<QuadratureEstimate<T>> {
    if !(rel_tol > T::zero() && rel_tol <= T::lit(1e-4)) {
        return Err(invalid("rel_tol must lie in (0, 1e-4]"));
    }
    let asym = asymptotic_moments(p)?;
    let p = *p;
    let t_max = T::lit(40.0) / p.lambda;
    let w = p.big_omega();
    let fastest = w + delta_omega.abs();
    let per_piece = T::PI() / fastest.max(p.lambda);
    let pieces = (t_max / per_piece).ceil().to_usize().unwrap_or(1).clamp(1, 50_000);
    let f = |s: T| {
        let phase = Complex::new(T::zero(), -delta_omega * s).exp();
        phase * correlation_from_moments(&p, &asym, s)
    };
    let integral = quadrature::integrate(f, T::zero(), t_max, pieces, rel_tol * T::lit(1e-2), T::zero(), 400_000);
    let bound = correlation_bound(&p)? * (-p.lambda * t_max).exp() / p.lambda;
    Ok(QuadratureEstimate {
        pair: SpectralPair { h: integral.value.re, s: integral.value.im, delta_omega },
        t_max,
        truncation_bound: bound,
        error_estimate: integral.error,
        evaluations: integral.evaluations,
        converged: integral.converged,
    })
}

/// 4ac − b² of the h numerator written as 4m²[(m(λ+μ)D_qq + D_pq)² + slack], where slack is
/// the determinant-bound margin; nonnegative for every valid parameter set.
pub fn positivity_discriminant<T: Real>(p: &OscillatorParams<T>) -> T {
    let m = p.m;
    let x = m * (p.lambda + p.mu) * p.d_qq + p.d_pq;
    T::lit(4.0) * m * m * (x * x + p.determinant_slack())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damped_oscillator::{gibbs_params, Constants};

    fn nonthermal() -> OscillatorParams<f64> {
        OscillatorParams::new_unchecked(1.3, 1.1, 0.2, 0.07, 0.3, 0.5, 0.05)
    }

    #[test]
    fn closed_matches_quadrature() {
        let p = nonthermal();
        for &d in &[-2.0, -0.5, 0.0, 0.7, 2.5] {
            let c = spectral_pair_closed(&p, d).unwrap();
            let q = spectral_pair_quadrature(&p, d, 1e-10).unwrap();
            assert!(q.pair.relative_error(&c) < 1e-9, "Δ={d}: {c:?} vs {:?}", q.pair);
        }
    }

    #[test]
    fn gibbs_zero_frequency() {
        let p: OscillatorParams<f64> = gibbs_params(1.0, 1.0, 0.1, 0.0, 1.0, Constants::default()).unwrap();
        let c = spectral_pair_closed(&p, 0.0).unwrap();
        let q = spectral_pair_quadrature(&p, 0.0, 1e-10).unwrap();
        assert!(((c.h - q.pair.h) / c.h).abs() < 1e-8);
    }

    #[test]
    fn odd_part_of_h() {
        let p = nonthermal();
        let w = p.big_omega();
        for &d in &[0.3, 1.0, 2.0] {
            let hp = spectral_pair_closed(&p, d).unwrap().h;
            let hm = spectral_pair_closed(&p, -d).unwrap().h;
            let den = denominator(p.lambda, w, d);
            let expect = -2.0 * p.m * p.lambda * p.constants.hbar * d / (p.m * p.m * den);
            assert!((hp - hm - expect).abs() < 1e-13);
            assert!(hm > hp);
        }
    }

    #[test]
    fn discriminant_matches_raw_form() {
        let p = nonthermal();
        let (a, b, c) = h_numerator_coefficients(&p);
        let raw = 4.0 * a * c - b * b;
        assert!((raw - positivity_discriminant(&p)).abs() < 1e-12 * raw.abs());
    }

    #[test]
    fn quadrature_tail_and_tolerance() {
        let p = nonthermal();
        assert!(spectral_pair_quadrature(&p, 0.0, 0.0).is_err());
        assert!(spectral_pair_quadrature(&p, 0.0, 1e-3).is_err());
        let q = spectral_pair_quadrature(&p, 0.4, 1e-10).unwrap();
        assert!(q.truncation_bound < 1e-15);
        assert!(q.converged);
    }
}
