use serde::{Deserialize, Serialize};

use super::operator::{c, Operator, C64};
use super::sparse::CsrMatrix;
use crate::damped_oscillator::{Constants, OscillatorParams};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuperoperatorKind {
    Generator,
    Propagator,
    Map,
}

/// Linear map on d×d operators, acting on column-stacked vectors: vec(AXB) = (Bᵀ ⊗ A) vec(X).
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CsrMatrix,
    kind: SuperoperatorKind,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CsrMatrix, kind: SuperoperatorKind) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::Dimension(format!(
                "superoperator on d={dim} needs a {0}x{0} matrix, got {1}x{2}",
                dim * dim,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Superoperator { dim, matrix, kind })
    }

    pub fn zero(dim: usize, kind: SuperoperatorKind) -> Self {
        Superoperator { dim, matrix: CsrMatrix::from_triplets(dim * dim, dim * dim, Vec::new()), kind }
    }

    /// The map X ↦ Σ cₖ Aₖ X Bₖ.
    pub fn from_sandwiches(dim: usize, terms: &[(C64, &Operator, &Operator)], kind: SuperoperatorKind) -> Self {
        let mut b = SandwichBuilder::new(dim);
        for (coef, a, bb) in terms {
            b.push(*coef, a, bb);
        }
        b.finish(kind)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SuperoperatorKind {
        self.kind
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        if x.dim() != self.dim {
            return Err(Error::Dimension(format!("operator dim {} vs superoperator dim {}", x.dim(), self.dim)));
        }
        Operator::unvec(&self.matrix.matvec(&x.vec()), self.dim)
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(Error::Dimension("adding superoperators of different dimensions".into()));
        }
        Ok(Superoperator { dim: self.dim, matrix: self.matrix.add(&other.matrix), kind: self.kind })
    }

    pub fn scale(&self, z: C64) -> Superoperator {
        Superoperator { dim: self.dim, matrix: self.matrix.scale(z), kind: self.kind }
    }

    /// self ∘ other
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(Error::Dimension("composing superoperators of different dimensions".into()));
        }
        Ok(Superoperator { dim: self.dim, matrix: self.matrix.matmul(&other.matrix), kind: SuperoperatorKind::Map })
    }

    /// Dual map with Tr[ρ·L*(O)] = Tr[L(ρ)·O].
    pub fn dual(&self) -> Superoperator {
        let d = self.dim;
        let flip = |k: usize| (k % d) * d + k / d;
        let t = self.matrix.triplets().map(|(r, col, v)| (flip(col), flip(r), v)).collect();
        Superoperator { dim: d, matrix: CsrMatrix::from_triplets(d * d, d * d, t), kind: self.kind }
    }

    /// max over columns of |vec(I)ᵀ L|, i.e. how far L is from annihilating the trace.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let mut col_sums = vec![c(0.0, 0.0); d * d];
        for (r, col, v) in self.matrix.triplets() {
            if r % (d + 1) == 0 {
                col_sums[col] += v;
            }
        }
        col_sums.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

pub(crate) struct SandwichBuilder {
    dim: usize,
    triplets: Vec<(usize, usize, C64)>,
}

impl SandwichBuilder {
    pub(crate) fn new(dim: usize) -> Self {
        SandwichBuilder { dim, triplets: Vec::new() }
    }

    /// adds coef · A X B, i.e. coef · (Bᵀ ⊗ A)
    pub(crate) fn push(&mut self, coef: C64, a: &Operator, b: &Operator) {
        if coef == c(0.0, 0.0) {
            return;
        }
        let d = self.dim;
        let (am, bm) = (a.as_array(), b.as_array());
        let a_nz: Vec<(usize, usize, C64)> =
            am.indexed_iter().filter(|(_, z)| **z != c(0.0, 0.0)).map(|((i, j), z)| (i, j, *z)).collect();
        for ((l, k), bz) in bm.indexed_iter() {
            if *bz == c(0.0, 0.0) {
                continue;
            }
            let w = coef * bz;
            for &(i, j, az) in &a_nz {
                self.triplets.push((i + d * k, j + d * l, w * az));
            }
        }
    }

    pub(crate) fn finish(self, kind: SuperoperatorKind) -> Superoperator {
        let n = self.dim * self.dim;
        Superoperator { dim: self.dim, matrix: CsrMatrix::from_triplets(n, n, self.triplets), kind }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpTerm {
    pub operator: Operator,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockOperators {
    pub q: Operator,
    pub p: Operator,
    pub a: Operator,
    pub a_dagger: Operator,
    pub number: Operator,
    /// p·p/2m + mω² q·q/2 from the truncated matrices
    pub h0: Operator,
}

pub fn fock_operators(d: usize, m: f64, omega: f64, constants: Constants<f64>) -> Result<FockOperators> {
    if d < 2 {
        return Err(Error::Dimension(format!("Fock truncation needs d >= 2, got {d}")));
    }
    if !(m > 0.0 && omega > 0.0) {
        return Err(Error::InvalidParams("mass and frequency must be positive".into()));
    }
    let hbar = constants.hbar;
    let mut a = Operator::zeros(d).into_array();
    for n in 1..d {
        a[[n - 1, n]] = c((n as f64).sqrt(), 0.0);
    }
    let a = Operator::from_array(a)?;
    let ad = a.dagger();
    let q = (&a + &ad).scale_re((hbar / (2.0 * m * omega)).sqrt());
    let p = (&ad - &a).scale(c(0.0, (hbar * m * omega / 2.0).sqrt()));
    let number = Operator::diagonal(&(0..d).map(|n| n as f64).collect::<Vec<_>>());
    let h0 = &p.dot(&p).scale_re(1.0 / (2.0 * m)) + &q.dot(&q).scale_re(m * omega * omega / 2.0);
    Ok(FockOperators { q, p, a, a_dagger: ad, number, h0 })
}

/// (1/iħ)[H,ρ] + Σ γₖ(LₖρLₖ† − ½{Lₖ†Lₖ, ρ})
pub fn lindblad_generator(h: &Operator, jumps: &[JumpTerm], hbar: f64) -> Result<Superoperator> {
    h.require_hermitian(1e-12)?;
    let d = h.dim();
    let id = Operator::identity(d);
    let mut b = SandwichBuilder::new(d);
    b.push(c(0.0, -1.0 / hbar), h, &id);
    b.push(c(0.0, 1.0 / hbar), &id, h);
    for j in jumps {
        if !(j.rate >= 0.0) {
            return Err(Error::NegativeRate(j.rate));
        }
        if j.operator.dim() != d {
            return Err(Error::Dimension("jump operator dimension differs from the Hamiltonian".into()));
        }
        let l = &j.operator;
        let ld = l.dagger();
        let ldl = ld.dot(l);
        b.push(c(j.rate, 0.0), l, &ld);
        b.push(c(-0.5 * j.rate, 0.0), &ldl, &id);
        b.push(c(-0.5 * j.rate, 0.0), &id, &ldl);
    }
    Ok(b.finish(SuperoperatorKind::Generator))
}

/// The damping and diffusion terms of the damped-oscillator generator, without the H0 commutator.
pub fn sns_dissipator(p: &OscillatorParams<f64>, d: usize) -> Result<Superoperator> {
    let p = p.validated()?;
    let f = fock_operators(d, p.m, p.omega, p.constants)?;
    Ok(sns_terms(&p, &f, false))
}

pub fn sns_generator(p: &OscillatorParams<f64>, d: usize) -> Result<Superoperator> {
    let p = p.validated()?;
    let f = fock_operators(d, p.m, p.omega, p.constants)?;
    Ok(sns_terms(&p, &f, true))
}

/// Same assembly without parameter validation, for probing invalid or degenerate sets.
pub fn sns_generator_unchecked(p: &OscillatorParams<f64>, d: usize) -> Result<Superoperator> {
    let f = fock_operators(d, p.m, p.omega, p.constants)?;
    Ok(sns_terms(p, &f, true))
}

fn sns_terms(p: &OscillatorParams<f64>, f: &FockOperators, with_h0: bool) -> Superoperator {
    let d = f.q.dim();
    let hb = p.constants.hbar;
    let id = Operator::identity(d);
    let (q, pp) = (&f.q, &f.p);
    let qp = q.dot(pp);
    let pq = pp.dot(q);
    let qq = q.dot(q);
    let ppp = pp.dot(pp);
    let mut b = SandwichBuilder::new(d);
    if with_h0 {
        b.push(c(0.0, -1.0 / hb), &f.h0, &id);
        b.push(c(0.0, 1.0 / hb), &id, &f.h0);
    }
    // −(i/2ħ)(λ+μ)[q,{p,ρ}] = k(qpρ + qρp − pρq − ρpq)
    let k1 = c(0.0, -(p.lambda + p.mu) / (2.0 * hb));
    b.push(k1, &qp, &id);
    b.push(k1, q, pp);
    b.push(-k1, pp, q);
    b.push(-k1, &id, &pq);
    // +(i/2ħ)(λ−μ)[p,{q,ρ}] = k(pqρ + pρq − qρp − ρqp)
    let k2 = c(0.0, (p.lambda - p.mu) / (2.0 * hb));
    b.push(k2, &pq, &id);
    b.push(k2, pp, q);
    b.push(-k2, q, pp);
    b.push(-k2, &id, &qp);
    // −D_pp/ħ²[q,[q,ρ]]
    let kpp = c(-p.d_pp / (hb * hb), 0.0);
    b.push(kpp, &qq, &id);
    b.push(kpp * -2.0, q, q);
    b.push(kpp, &id, &qq);
    // −D_qq/ħ²[p,[p,ρ]]
    let kqq = c(-p.d_qq / (hb * hb), 0.0);
    b.push(kqq, &ppp, &id);
    b.push(kqq * -2.0, pp, pp);
    b.push(kqq, &id, &ppp);
    // +D_pq/ħ²([q,[p,ρ]] + [p,[q,ρ]])
    let kpq = c(p.d_pq / (hb * hb), 0.0);
    let sym = &qp + &pq;
    b.push(kpq, &sym, &id);
    b.push(kpq, &id, &sym);
    b.push(kpq * -2.0, q, pp);
    b.push(kpq * -2.0, pp, q);
    b.finish(SuperoperatorKind::Generator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damped_oscillator::gibbs_params;

    #[test]
    fn fock_identities() {
        let f = fock_operators(6, 1.3, 0.7, Constants::default()).unwrap();
        let comm = f.q.commutator(&f.p);
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { c(0.0, 1.0) } else { c(0.0, 0.0) };
                assert!((comm.get(i, j) - expect).norm() < 1e-13);
            }
        }
        assert!((comm.get(5, 5) - c(0.0, 1.0)).norm() > 1.0);
        let q00 = f.q.dot(&f.q).get(0, 0).re;
        assert!((q00 - 1.0 / (2.0 * 1.3 * 0.7)).abs() < 1e-14);
        let ada = f.a_dagger.dot(&f.a);
        for n in 0..6 {
            assert!((ada.get(n, n).re - n as f64).abs() < 1e-13);
        }
        assert!(fock_operators(1, 1.0, 1.0, Constants::default()).is_err());
    }

    #[test]
    fn generators_annihilate_trace() {
        let p = gibbs_params(1.0, 1.0, 0.2, 0.05, 1.0, Constants::default()).unwrap();
        assert!(sns_generator(&p, 12).unwrap().trace_defect() < 1e-12);
        let f = fock_operators(5, 1.0, 1.0, Constants::default()).unwrap();
        let l = lindblad_generator(&f.h0, &[JumpTerm { operator: f.a.clone(), rate: 0.3 }], 1.0).unwrap();
        assert!(l.trace_defect() < 1e-12);
    }

    #[test]
    fn lindblad_rejects_bad_input() {
        let f = fock_operators(3, 1.0, 1.0, Constants::default()).unwrap();
        assert!(lindblad_generator(&f.a, &[], 1.0).is_err());
        assert!(lindblad_generator(&f.h0, &[JumpTerm { operator: f.a.clone(), rate: -1.0 }], 1.0).is_err());
    }

    #[test]
    fn sandwich_convention() {
        let f = fock_operators(4, 1.0, 1.0, Constants::default()).unwrap();
        let x = &f.q.dot(&f.p) + &f.number;
        let s = Superoperator::from_sandwiches(4, &[(c(1.0, 0.0), &f.a, &f.p)], SuperoperatorKind::Map);
        let direct = f.a.dot(&x).dot(&f.p);
        assert!((&s.apply(&x).unwrap() - &direct).max_abs() < 1e-13);
    }

    #[test]
    fn dual_pairs_traces() {
        let f = fock_operators(4, 1.0, 1.0, Constants::default()).unwrap();
        let s = Superoperator::from_sandwiches(4, &[(c(0.3, 0.7), &f.a, &f.p), (c(1.0, 0.0), &f.q, &f.number)], SuperoperatorKind::Map);
        let rho = &f.number + &f.q;
        let o = &f.p.dot(&f.a) + &f.h0;
        let lhs = rho.trace_product(&s.dual().apply(&o).unwrap());
        let rhs = s.apply(&rho).unwrap().trace_product(&o);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
