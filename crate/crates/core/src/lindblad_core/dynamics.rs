use ndarray::{Array1, Array2};
use ndarray_linalg::{FactorizeInto, ReciprocalConditionNum, Solve};

use super::expm::{expm_dense, expv, ExpvOptions};
use super::generator::{Superoperator, SuperoperatorKind};
use super::operator::{c, DensityMatrix, Operator, C64};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Largest trace drift accepted before renormalizing an evolved state.
pub const EVOLVED_TRACE_TOL: f64 = 1e-8;
/// Bordered-system reciprocal condition below which the stationary state is declared non-unique.
pub const UNIQUENESS_RCOND: f64 = 1e-10;

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

fn require_generator(l: &Superoperator) -> Result<()> {
    if l.kind() == SuperoperatorKind::Generator {
        Ok(())
    } else {
        Err(Error::Dimension("expected a generator superoperator".into()))
    }
}

/// e^{Lt} applied to a vectorized operator.
pub fn propagate_vec(l: &Superoperator, v: &[C64], t: f64) -> Result<Vec<C64>> {
    check_time(t)?;
    Ok(expv(l.matrix(), t, v, ExpvOptions::default())?.w)
}

pub fn propagate(l: &Superoperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    require_generator(l)?;
    if rho0.dim() != l.dim() {
        return Err(Error::Dimension("state and generator dimensions differ".into()));
    }
    let w = propagate_vec(l, &rho0.operator().vec(), t)?;
    DensityMatrix::from_evolved(Operator::unvec(&w, l.dim())?, EVOLVED_TRACE_TOL)
}

/// Below this Hilbert dimension grid propagation uses cached dense propagators.
pub const DENSE_GRID_DIM: usize = 32;

/// Steps a vectorized operator between grid times, reusing e^{LΔt} for repeated Δt.
struct GridStepper<'a> {
    l: &'a Superoperator,
    dense: bool,
    cached: Option<(f64, Array2<C64>)>,
}

impl<'a> GridStepper<'a> {
    fn new(l: &'a Superoperator) -> Self {
        GridStepper { l, dense: l.dim() <= DENSE_GRID_DIM, cached: None }
    }

    fn step(&mut self, v: &[C64], dt: f64, t: f64) -> Result<Vec<C64>> {
        if !self.dense {
            return Ok(expv(self.l.matrix(), dt, v, ExpvOptions::default())?.w);
        }
        let reuse = matches!(&self.cached, Some((h, _)) if (h - dt).abs() <= 8.0 * f64::EPSILON * t);
        if !reuse {
            let a = self.l.matrix().to_dense().mapv(|z| z * dt);
            self.cached = Some((dt, expm_dense(&a)?));
        }
        let e = &self.cached.as_ref().expect("propagator cached above").1;
        Ok(e.dot(&Array1::from(v.to_vec())).to_vec())
    }
}

fn walk_grid<S, F>(l: &Superoperator, start: S, times: &[f64], mut advance: F) -> Result<Vec<S>>
where
    S: Clone,
    F: FnMut(&mut GridStepper, &S, f64, f64) -> Result<S>,
{
    let mut stepper = GridStepper::new(l);
    let mut out = Vec::with_capacity(times.len());
    let mut x = start;
    let mut t_prev = 0.0;
    for &t in times {
        check_time(t)?;
        if t < t_prev {
            return Err(Error::NegativeTime(t - t_prev));
        }
        if t > t_prev {
            x = advance(&mut stepper, &x, t - t_prev, t)?;
        }
        out.push(x.clone());
        t_prev = t;
    }
    Ok(out)
}

/// States at each of the (nondecreasing) `times`, stepping between consecutive grid points.
/// Each recorded state is renormalized before the next step.
pub fn propagate_grid(l: &Superoperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    require_generator(l)?;
    if rho0.dim() != l.dim() {
        return Err(Error::Dimension("state and generator dimensions differ".into()));
    }
    let d = l.dim();
    walk_grid(l, rho0.clone(), times, |st, rho, dt, t| {
        let w = st.step(&rho.operator().vec(), dt, t)?;
        DensityMatrix::from_evolved(Operator::unvec(&w, d)?, EVOLVED_TRACE_TOL)
    })
}

pub fn propagate_vec_grid(l: &Superoperator, v0: &[C64], times: &[f64]) -> Result<Vec<Vec<C64>>> {
    walk_grid(l, v0.to_vec(), times, |st, v, dt, t| st.step(v, dt, t))
}

/// Heisenberg-picture evolution O ↦ e^{L* t}[O].
pub fn adjoint_propagate(l: &Superoperator, o: &Operator, t: f64) -> Result<Operator> {
    check_time(t)?;
    if o.dim() != l.dim() {
        return Err(Error::Dimension("operator and generator dimensions differ".into()));
    }
    let dual = l.dual();
    Operator::unvec(&propagate_vec(&dual, &o.vec(), t)?, l.dim())
}

pub fn adjoint_propagate_grid(l: &Superoperator, o: &Operator, times: &[f64]) -> Result<Vec<Operator>> {
    let dual = l.dual();
    propagate_vec_grid(&dual, &o.vec(), times)?.into_iter().map(|w| Operator::unvec(&w, l.dim())).collect()
}

/// Dense e^{Lt} as a propagator superoperator.
pub fn propagator_matrix(l: &Superoperator, t: f64) -> Result<Superoperator> {
    check_time(t)?;
    require_generator(l)?;
    let dense = l.matrix().to_dense().mapv(|z| z * t);
    let e = expm_dense(&dense)?;
    Superoperator::new(l.dim(), CsrMatrix::from_dense(&e), SuperoperatorKind::Propagator)
}

/// Unique ρ̃ with L[ρ̃] = 0 and Tr ρ̃ = 1.
pub fn stationary_state(l: &Superoperator) -> Result<DensityMatrix> {
    require_generator(l)?;
    let d = l.dim();
    let n = d * d;
    let mut m = l.matrix().to_dense();
    // the diagonal rows of a trace-annihilating generator are linearly dependent; trade one for the trace
    for j in 0..n {
        m[[0, j]] = c(0.0, 0.0);
    }
    for k in 0..d {
        m[[0, k * (d + 1)]] = c(1.0, 0.0);
    }
    let lu = match m.factorize_into() {
        Ok(lu) => lu,
        Err(_) => return Err(Error::NonUniqueStationary(0.0)),
    };
    let rcond = lu.rcond().map_err(|e| Error::Numerical(format!("rcond: {e}")))?;
    if !(rcond >= UNIQUENESS_RCOND) {
        return Err(Error::NonUniqueStationary(rcond));
    }
    let mut rhs = Array1::<C64>::zeros(n);
    rhs[0] = c(1.0, 0.0);
    let x = lu.solve(&rhs).map_err(|e| Error::Numerical(format!("stationary solve: {e}")))?;
    let op = Operator::unvec(x.as_slice().unwrap(), d)?;
    DensityMatrix::from_evolved(op, EVOLVED_TRACE_TOL)
}

/// Smallest nonzero decay rate −Re λ over the generator spectrum; `None` if every eigenvalue is (numerically) on the imaginary axis.
pub fn spectral_gap(l: &Superoperator) -> Result<Option<f64>> {
    use ndarray_linalg::EigVals;
    let vals = l.matrix().to_dense().eigvals().map_err(|e| Error::Numerical(format!("eigvals: {e}")))?;
    let scale = l.matrix().norm_one().max(1.0);
    let gap = vals.iter().map(|z| -z.re).filter(|r| *r > 1e-10 * scale).fold(f64::INFINITY, f64::min);
    Ok(if gap.is_finite() { Some(gap) } else { None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damped_oscillator::Constants;
    use crate::lindblad_core::generator::{fock_operators, lindblad_generator, JumpTerm};

    #[test]
    fn two_level_decay() {
        let f = fock_operators(2, 1.0, 1.0, Constants::default()).unwrap();
        let l = lindblad_generator(&f.number, &[JumpTerm { operator: f.a.clone(), rate: 0.7 }], 1.0).unwrap();
        let rho = DensityMatrix::new(Operator::diagonal(&[0.0, 1.0])).unwrap();
        for &t in &[0.0, 0.5, 2.0] {
            let r = propagate(&l, &rho, t).unwrap();
            assert!((r.operator().get(1, 1).re - (-0.7 * t).exp()).abs() < 1e-11);
        }
        let ss = stationary_state(&l).unwrap();
        assert!((ss.operator().get(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_is_not_unique() {
        let f = fock_operators(4, 1.0, 1.0, Constants::default()).unwrap();
        let l = lindblad_generator(&f.number, &[], 1.0).unwrap();
        assert!(matches!(stationary_state(&l), Err(Error::NonUniqueStationary(_))));
        assert!(spectral_gap(&l).unwrap().is_none());
    }
}
