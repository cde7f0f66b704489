//! Reduced generators for a system weakly coupled to damped oscillators through U_I = Σ Vₙ ⊗ qₙ.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::damped_oscillator::{asymptotic_moments, OscillatorParams};
use crate::error::{Error, Result};
use crate::lindblad_core::{c, lindblad_generator, JumpTerm, Operator, SandwichBuilder, Superoperator, SuperoperatorKind, C64};
use crate::spectral_functions::spectral_pair_closed;

/// Rates below zero by less than this are rounding; anything further is a broken invariant.
pub const NEGATIVE_RATE_TOL: f64 = 1e-12;
const SECTOR_DROP_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingTerm {
    pub v: Operator,
    pub bath_mode: OscillatorParams<f64>,
}

impl CouplingTerm {
    pub fn new(v: Operator, bath_mode: OscillatorParams<f64>) -> Result<Self> {
        v.require_hermitian(1e-12)?;
        Ok(CouplingTerm { v, bath_mode: bath_mode.validated()? })
    }
}

/// Part of V connecting eigenstates with ε_i − ε_j = ħΔω; e^{L_S s}[V_Δω] = e^{−iΔω s}V_Δω.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySector {
    pub delta_omega: f64,
    pub v_sector: Operator,
}

/// One dissipative channel of the RWA generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub coupling: usize,
    pub delta_omega: f64,
    pub h: f64,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MasterEquationSpec {
    pub h_system: Operator,
    pub lamb_shift: Operator,
    pub h_eff: Operator,
    pub jumps: Vec<JumpTerm>,
    pub channels: Vec<Channel>,
    pub hbar: f64,
}

impl MasterEquationSpec {
    pub fn generator(&self) -> Result<Superoperator> {
        lindblad_generator(&self.h_eff, &self.jumps, self.hbar)
    }
}

fn default_tolerance(vals: &[f64]) -> f64 {
    1e-9 * vals.iter().fold(0.0f64, |a, e| a.max(e.abs())).max(f64::MIN_POSITIVE)
}

/// Single-linkage clustering of nonnegative values; returns the cluster means.
fn cluster(mut xs: Vec<f64>, tol: f64) -> Vec<f64> {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut centers = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for x in xs {
        if let Some(&last) = group.last() {
            if x - last > tol {
                centers.push(group.iter().sum::<f64>() / group.len() as f64);
                group.clear();
            }
        }
        group.push(x);
    }
    if !group.is_empty() {
        centers.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    if let Some(first) = centers.first_mut() {
        if *first <= tol {
            *first = 0.0;
        }
    }
    centers
}

/// Splits V by Bohr frequency of H_S. Sectors come sorted by Δω; empty blocks are omitted.
pub fn frequency_sectors(h_s: &Operator, v: &Operator, degeneracy_tol: Option<f64>, hbar: f64) -> Result<Vec<FrequencySector>> {
    h_s.require_hermitian(1e-12)?;
    if v.dim() != h_s.dim() {
        return Err(Error::Dimension("coupling operator and system Hamiltonian differ in dimension".into()));
    }
    let d = h_s.dim();
    let (vals, u) = h_s.eigh()?;
    let vals: Vec<f64> = vals.to_vec();
    let tol = degeneracy_tol.unwrap_or_else(|| default_tolerance(&vals)) / hbar;
    let w = u.t().mapv(|z| z.conj()).dot(v.as_array()).dot(&u);
    let gap = |i: usize, j: usize| (vals[i] - vals[j]) / hbar;
    let mut abs_gaps = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            if vals[i] >= vals[j] {
                abs_gaps.push(gap(i, j));
            }
        }
    }
    let centers = cluster(abs_gaps, tol);
    let nearest = |x: f64| -> usize {
        let ax = x.abs();
        let mut best = 0;
        for (k, cval) in centers.iter().enumerate() {
            if (cval - ax).abs() < (centers[best] - ax).abs() {
                best = k;
            }
        }
        best
    };
    let scale = v.max_abs().max(f64::MIN_POSITIVE);
    let mut blocks: Vec<(f64, Array2<C64>)> = Vec::new();
    for (k, &cval) in centers.iter().enumerate() {
        let signs: &[f64] = if cval == 0.0 { &[1.0] } else { &[-1.0, 1.0] };
        for &sg in signs {
            let mut m = Array2::<C64>::zeros((d, d));
            for i in 0..d {
                for j in 0..d {
                    let g = gap(i, j);
                    let same_side = if cval == 0.0 { true } else { g.signum() == sg && g != 0.0 };
                    if nearest(g) == k && same_side {
                        m[[i, j]] = w[[i, j]];
                    }
                }
            }
            let norm = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            if norm > SECTOR_DROP_TOL * scale {
                blocks.push((sg * cval, m));
            }
        }
    }
    blocks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let ud = u.t().mapv(|z| z.conj());
    blocks
        .into_iter()
        .map(|(dw, m)| Ok(FrequencySector { delta_omega: dw, v_sector: Operator::from_array(u.dot(&m).dot(&ud))? }))
        .collect()
}

/// L_S − (1/ħ²) Σ ⟨qₙ²⟩∞ [Vₙ, [Vₙ, ·]]
pub fn simple_markov_generator(h_s: &Operator, couplings: &[CouplingTerm], hbar: f64) -> Result<Superoperator> {
    let mut l = lindblad_generator(h_s, &[], hbar)?;
    for term in couplings {
        term.v.require_hermitian(1e-12)?;
        if term.v.dim() != h_s.dim() {
            return Err(Error::Dimension("coupling operator and system Hamiltonian differ in dimension".into()));
        }
        let qq = asymptotic_moments(&term.bath_mode)?.qq;
        let k = c(-qq / (hbar * hbar), 0.0);
        let v = &term.v;
        let vv = v.dot(v);
        let id = Operator::identity(v.dim());
        let mut b = SandwichBuilder::new(v.dim());
        b.push(k, &vv, &id);
        b.push(k * -2.0, v, v);
        b.push(k, &id, &vv);
        l = l.add(&b.finish(SuperoperatorKind::Generator))?;
    }
    Ok(l)
}

/// Rotating-wave generator: jumps V_Δω at rate 2h(Δω)/ħ², Lamb shift Σ S(Δω)/ħ · V_Δω†V_Δω.
pub fn rwa_master_equation(
    h_s: &Operator,
    couplings: &[CouplingTerm],
    degeneracy_tol: Option<f64>,
    hbar: f64,
) -> Result<(MasterEquationSpec, Superoperator)> {
    h_s.require_hermitian(1e-12)?;
    let d = h_s.dim();
    let mut lamb = Operator::zeros(d);
    let mut jumps = Vec::new();
    let mut channels = Vec::new();
    for (n, term) in couplings.iter().enumerate() {
        term.v.require_hermitian(1e-12)?;
        let rel = (term.bath_mode.constants.hbar - hbar).abs() / hbar;
        if rel > 1e-12 {
            return Err(Error::InvalidParams(format!("coupling {n}: bath ħ differs from the system ħ")));
        }
        for sector in frequency_sectors(h_s, &term.v, degeneracy_tol, hbar)? {
            let pair = spectral_pair_closed(&term.bath_mode, sector.delta_omega)?;
            if pair.h < -NEGATIVE_RATE_TOL {
                return Err(Error::Numerical(format!(
                    "coupling {n}, Δω = {}: h = {:e} is negative for an admissible bath",
                    sector.delta_omega, pair.h
                )));
            }
            let vdv = sector.v_sector.dagger().dot(&sector.v_sector);
            lamb = &lamb + &vdv.scale_re(pair.s / hbar);
            jumps.push(JumpTerm { operator: sector.v_sector.clone(), rate: 2.0 * pair.h.max(0.0) / (hbar * hbar) });
            channels.push(Channel { coupling: n, delta_omega: sector.delta_omega, h: pair.h, s: pair.s });
        }
    }
    let lamb = lamb.hermitian_part();
    let h_eff = (h_s + &lamb).hermitian_part();
    let spec = MasterEquationSpec { h_system: h_s.clone(), lamb_shift: lamb, h_eff, jumps, channels, hbar };
    let l = spec.generator()?;
    Ok((spec, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damped_oscillator::{gibbs_params, Constants};
    use crate::lindblad_core::fock_operators;

    fn harmonic(d: usize) -> Operator {
        Operator::diagonal(&(0..d).map(|n| n as f64 + 0.5).collect::<Vec<_>>())
    }

    #[test]
    fn harmonic_position_has_two_sectors() {
        let f = fock_operators(6, 1.0, 1.0, Constants::default()).unwrap();
        let s = frequency_sectors(&harmonic(6), &f.q, None, 1.0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].delta_omega, -1.0);
        assert_eq!(s[1].delta_omega, 1.0);
        let k = std::f64::consts::FRAC_1_SQRT_2;
        assert!((&s[1].v_sector - &f.a_dagger.scale_re(k)).max_abs() < 1e-12);
        assert!((&s[0].v_sector - &f.a.scale_re(k)).max_abs() < 1e-12);
    }

    #[test]
    fn commuting_coupling_is_one_sector() {
        let h = harmonic(4);
        let s = frequency_sectors(&h, &h, None, 1.0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].delta_omega, 0.0);
    }

    #[test]
    fn rwa_rates_follow_h() {
        let f = fock_operators(5, 1.0, 1.0, Constants::default()).unwrap();
        let bath = gibbs_params(1.0, 1.0, 0.3, 0.0, 0.5, Constants::default()).unwrap();
        let term = CouplingTerm::new(f.q.scale_re(0.1), bath).unwrap();
        let (spec, l) = rwa_master_equation(&harmonic(5), &[term], None, 1.0).unwrap();
        assert_eq!(spec.jumps.len(), 2);
        let up = spectral_pair_closed(&bath, 1.0).unwrap().h;
        let down = spectral_pair_closed(&bath, -1.0).unwrap().h;
        assert!((spec.jumps[1].rate - 2.0 * up).abs() < 1e-14);
        assert!((spec.jumps[0].rate - 2.0 * down).abs() < 1e-14);
        assert!(l.trace_defect() < 1e-12);
    }
}
