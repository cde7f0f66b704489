use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{EigValsh, Eigh, UPLO};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    m: Array2<C64>,
}

impl Operator {
    pub fn from_array(m: Array2<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!("operator must be square and nonempty, got {:?}", m.dim())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("operator has non-finite entries".into()));
        }
        Ok(Operator { m })
    }

    pub(crate) fn from_array_unchecked(m: Array2<C64>) -> Self {
        Operator { m }
    }

    pub fn from_real(m: Array2<f64>) -> Result<Self> {
        Self::from_array(m.mapv(|x| c(x, 0.0)))
    }

    pub fn zeros(d: usize) -> Self {
        Operator { m: Array2::zeros((d, d)) }
    }

    pub fn identity(d: usize) -> Self {
        Operator { m: Array2::eye(d) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = Array2::zeros((d, d));
        for (i, v) in values.iter().enumerate() {
            m[[i, i]] = c(*v, 0.0);
        }
        Operator { m }
    }

    /// |a⟩⟨b|
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let m = Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j].conj());
        Operator { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.m
    }

    pub fn into_array(self) -> Array2<C64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[[i, j]]
    }

    pub fn dagger(&self) -> Self {
        Operator { m: self.m.t().mapv(|z| z.conj()) }
    }

    pub fn transpose(&self) -> Self {
        Operator { m: self.m.t().to_owned() }
    }

    pub fn dot(&self, other: &Operator) -> Self {
        Operator { m: self.m.dot(&other.m) }
    }

    pub fn scale(&self, z: C64) -> Self {
        Operator { m: &self.m * z }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(c(x, 0.0))
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &self.dot(other) - &other.dot(self)
    }

    pub fn anticommutator(&self, other: &Operator) -> Self {
        &self.dot(other) + &other.dot(self)
    }

    /// A ⊗ B with the first factor as the slow index.
    pub fn kron(&self, other: &Operator) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let m = Array2::from_shape_fn((da * db, da * db), |(r, col)| {
            self.m[[r / db, col / db]] * other.m[[r % db, col % db]]
        });
        Operator { m }
    }

    pub fn trace(&self) -> C64 {
        self.m.diag().sum()
    }

    /// Tr(A·B) without forming the product.
    pub fn trace_product(&self, other: &Operator) -> C64 {
        let d = self.dim();
        let mut acc = c(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.m[[i, j]] * other.m[[j, i]];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.m[[i, j]] - self.m[[j, i]].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol * self.max_abs().max(1.0)
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        if self.is_hermitian(tol) {
            Ok(())
        } else {
            Err(Error::NotHermitian(self.hermitian_deviation()))
        }
    }

    pub fn hermitian_part(&self) -> Self {
        Operator { m: (&self.m + &self.m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5) }
    }

    /// Eigenvalues in ascending order; the caller guarantees hermiticity.
    pub fn eigvalsh(&self) -> Result<Array1<f64>> {
        self.m.eigvalsh(UPLO::Upper).map_err(|e| Error::Numerical(format!("eigvalsh: {e}")))
    }

    /// (eigenvalues ascending, eigenvector columns)
    pub fn eigh(&self) -> Result<(Array1<f64>, Array2<C64>)> {
        // row-major input reaches LAPACK as its transpose, which conjugates the eigenvectors
        let n = self.dim();
        let f = Array2::from_shape_fn((n, n).f(), |(i, j)| self.m[[i, j]]);
        f.eigh(UPLO::Upper).map_err(|e| Error::Numerical(format!("eigh: {e}")))
    }

    /// Column-stacked vectorization.
    pub fn vec(&self) -> Vec<C64> {
        self.m.t().iter().copied().collect()
    }

    pub fn unvec(v: &[C64], d: usize) -> Result<Self> {
        if v.len() != d * d {
            return Err(Error::Dimension(format!("vector of length {} is not a {d}x{d} operator", v.len())));
        }
        Ok(Operator { m: Array2::from_shape_fn((d, d), |(i, j)| v[i + d * j]) })
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m + &rhs.m }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m - &rhs.m }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.dot(rhs)
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            self.m.outer_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("operator rows must form a square matrix"));
        }
        let m = Array2::from_shape_fn((n, n), |(i, j)| c(rows[i][j][0], rows[i][j][1]));
        Operator::from_array(m).map_err(D::Error::custom)
    }
}

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive-semidefinite operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let dev = op.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not hermitian (deviation {dev:e})")));
        }
        let tr = op.trace();
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let op = op.hermitian_part();
        let min = op.eigvalsh()?[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix { op })
    }

    /// Hermitizes and renormalizes a numerically evolved state; fails when the trace has
    /// drifted by more than `trace_tol` or an eigenvalue is below −1e-10.
    pub fn from_evolved(op: Operator, trace_tol: f64) -> Result<Self> {
        let op = op.hermitian_part();
        let tr = op.trace();
        if (tr - c(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::InvalidDensity(format!("trace drifted to {tr}")));
        }
        Self::new(op.scale(c(1.0 / tr.re, 0.0)))
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(Operator::outer(&v, &v))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix { op: Operator::identity(d).scale_re(1.0 / d as f64) }
    }

    /// e^{−H/kT}/Z for a hermitian H.
    pub fn gibbs(h: &Operator, kt: f64) -> Result<Self> {
        let (vals, vecs) = h.eigh()?;
        let e0 = vals[0];
        let w: Vec<f64> = vals.iter().map(|e| (-(e - e0) / kt).exp()).collect();
        let z: f64 = w.iter().sum();
        let d = h.dim();
        let m = Array2::from_shape_fn((d, d), |(i, j)| {
            (0..d).map(|k| vecs[[i, k]] * vecs[[j, k]].conj() * (w[k] / z)).sum::<C64>()
        });
        Self::new(Operator::from_array_unchecked(m).hermitian_part())
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn expectation(&self, o: &Operator) -> C64 {
        self.op.trace_product(o)
    }

    pub fn purity(&self) -> f64 {
        self.op.trace_product(&self.op).re
    }

    pub fn eigenvalues(&self) -> Result<Array1<f64>> {
        self.op.eigvalsh()
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        trace_distance(&self.op, &other.op)
    }
}

/// ½‖A − B‖₁ for hermitian A, B.
pub fn trace_distance(a: &Operator, b: &Operator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension("trace distance of operators with different dimensions".into()));
    }
    let diff = (a - b).hermitian_part();
    Ok(0.5 * diff.eigvalsh()?.iter().map(|x| x.abs()).sum::<f64>())
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let op = Operator::deserialize(d)?;
        DensityMatrix::new(op).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_roundtrip_is_column_major() {
        let op = Operator::from_real(ndarray::array![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let v = op.vec();
        assert_eq!(v.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(Operator::unvec(&v, 2).unwrap(), op);
    }

    #[test]
    fn density_checks() {
        assert!(DensityMatrix::new(Operator::diagonal(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::new(Operator::diagonal(&[1.2, -0.2])).is_err());
        let rho = DensityMatrix::new(Operator::diagonal(&[0.25, 0.75])).unwrap();
        assert!((rho.purity() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn json_shape() {
        let op = Operator::from_array(ndarray::array![[c(1.0, 0.0), c(0.0, 2.0)], [c(0.0, -2.0), c(3.0, 0.0)]]).unwrap();
        let s = serde_json::to_string(&op).unwrap();
        assert_eq!(s, "[[[1.0,0.0],[0.0,2.0]],[[0.0,-2.0],[3.0,0.0]]]");
        let back: Operator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn kron_ordering() {
        let a = Operator::diagonal(&[1.0, 2.0]);
        let b = Operator::diagonal(&[1.0, 10.0]);
        let k = a.kron(&b);
        let diag: Vec<f64> = (0..4).map(|i| k.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 10.0, 2.0, 20.0]);
    }
}
