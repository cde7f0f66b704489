use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::generator::{SandwichBuilder, Superoperator, SuperoperatorKind};
use super::operator::{c, DensityMatrix, Operator, C64};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Factor of a bipartite space; the system is the slow index, r = s·d_E + e.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    System,
    Environment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub d_s: usize,
    pub d_e: usize,
}

impl Dims {
    pub fn new(d_s: usize, d_e: usize) -> Self {
        Dims { d_s, d_e }
    }

    pub fn total(&self) -> usize {
        self.d_s * self.d_e
    }

    fn check(&self, d: usize) -> Result<()> {
        if d != self.total() || self.d_s == 0 || self.d_e == 0 {
            return Err(Error::Dimension(format!("operator of dim {d} does not factor as {}x{}", self.d_s, self.d_e)));
        }
        Ok(())
    }
}

pub fn partial_trace_operator(o: &Operator, dims: Dims, keep: Subsystem) -> Result<Operator> {
    dims.check(o.dim())?;
    let (ds, de) = (dims.d_s, dims.d_e);
    let m = o.as_array();
    let out = match keep {
        Subsystem::System => Array2::from_shape_fn((ds, ds), |(s, t)| (0..de).map(|e| m[[s * de + e, t * de + e]]).sum::<C64>()),
        Subsystem::Environment => {
            Array2::from_shape_fn((de, de), |(e, f)| (0..ds).map(|s| m[[s * de + e, s * de + f]]).sum::<C64>())
        }
    };
    Operator::from_array(out)
}

pub fn partial_trace(rho: &DensityMatrix, dims: Dims, keep: Subsystem) -> Result<DensityMatrix> {
    let op = partial_trace_operator(rho.operator(), dims, keep)?;
    DensityMatrix::from_evolved(op, 1e-10)
}

/// P₀[O] = Tr_E[O] ⊗ ρ̃
pub fn project_p0(o: &Operator, rho_tilde: &DensityMatrix, dims: Dims) -> Result<Operator> {
    if rho_tilde.dim() != dims.d_e {
        return Err(Error::Dimension("ρ̃ must live on the environment factor".into()));
    }
    Ok(partial_trace_operator(o, dims, Subsystem::System)?.kron(rho_tilde.operator()))
}

/// L ⊗ id on the composite space.
pub fn lift_system(l_s: &Superoperator, d_e: usize) -> Superoperator {
    let ds = l_s.dim();
    let n = ds * d_e;
    let mut t = Vec::with_capacity(l_s.matrix().nnz() * d_e * d_e);
    for (r, col, v) in l_s.matrix().triplets() {
        let (i, j) = (r % ds, r / ds);
        let (k, l) = (col % ds, col / ds);
        for e in 0..d_e {
            for f in 0..d_e {
                t.push(((i * d_e + e) + n * (j * d_e + f), (k * d_e + e) + n * (l * d_e + f), v));
            }
        }
    }
    lifted(n, t, l_s.kind())
}

/// id ⊗ L on the composite space.
pub fn lift_environment(l_e: &Superoperator, d_s: usize) -> Superoperator {
    let de = l_e.dim();
    let n = d_s * de;
    let mut t = Vec::with_capacity(l_e.matrix().nnz() * d_s * d_s);
    for (r, col, v) in l_e.matrix().triplets() {
        let (e, f) = (r % de, r / de);
        let (g, h) = (col % de, col / de);
        for s in 0..d_s {
            for u in 0..d_s {
                t.push(((s * de + e) + n * (u * de + f), (s * de + g) + n * (u * de + h), v));
            }
        }
    }
    lifted(n, t, l_e.kind())
}

fn lifted(n: usize, t: Vec<(usize, usize, C64)>, kind: SuperoperatorKind) -> Superoperator {
    Superoperator::new(n, CsrMatrix::from_triplets(n * n, n * n, t), kind).expect("lifted dimensions are consistent")
}

/// (1/iħ)[U, ·] on the composite space.
pub fn interaction_generator(u_i: &Operator, hbar: f64) -> Result<Superoperator> {
    u_i.require_hermitian(1e-12)?;
    let id = Operator::identity(u_i.dim());
    let mut b = SandwichBuilder::new(u_i.dim());
    b.push(c(0.0, -1.0 / hbar), u_i, &id);
    b.push(c(0.0, 1.0 / hbar), &id, u_i);
    Ok(b.finish(SuperoperatorKind::Generator))
}

/// L_S ⊗ id + id ⊗ L_E + (1/iħ)[U_I, ·]
pub fn compose_composite_generator(
    l_s: &Superoperator,
    l_e: &Superoperator,
    u_i: &Operator,
    hbar: f64,
) -> Result<Superoperator> {
    for l in [l_s, l_e] {
        if l.kind() != SuperoperatorKind::Generator {
            return Err(Error::Dimension("composite assembly expects generators".into()));
        }
    }
    let dims = Dims::new(l_s.dim(), l_e.dim());
    dims.check(u_i.dim())?;
    let l0 = lift_system(l_s, dims.d_e).add(&lift_environment(l_e, dims.d_s))?;
    l0.add(&interaction_generator(u_i, hbar)?)
}
