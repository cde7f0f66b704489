use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::Inverse;

use super::operator::{c, C64};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

fn norm_one(a: &Array2<C64>) -> f64 {
    a.axis_iter(Axis(1)).map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Dense e^{A} by Padé-13 scaling and squaring.
pub fn expm_dense(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    let nrm = norm_one(a);
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.mapv(|z| z / 2f64.powi(s));
    let id: Array2<C64> = Array2::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = |k: usize| c(PADE13[k], 0.0);
    let u_inner = &a6.dot(&(&a6 * b(13) + &a4 * b(11) + &a2 * b(9))) + &(&a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let u = a.dot(&u_inner);
    let v = &a6.dot(&(&a6 * b(12) + &a4 * b(10) + &a2 * b(8))) + &(&a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0));
    let q_inv = (&v - &u).inv().map_err(|e| Error::Numerical(format!("Padé denominator: {e}")))?;
    let mut r = q_inv.dot(&(&v + &u));
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Anything that can apply itself to a vector.
pub trait LinearMap {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
    fn norm_inf(&self) -> f64;
}

impl LinearMap for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec_into(x, y)
    }
    fn norm_inf(&self) -> f64 {
        CsrMatrix::norm_inf(self)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExpvOptions {
    pub krylov_dim: usize,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for ExpvOptions {
    fn default() -> Self {
        ExpvOptions { krylov_dim: 30, tol: 1e-12, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct ExpvOutput {
    pub w: Vec<C64>,
    pub error_estimate: f64,
    pub steps: usize,
}

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(c(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn round_step(x: f64) -> f64 {
    let s = 10f64.powf(x.log10().floor() - 1.0);
    (x / s).ceil() * s
}

/// w = e^{tA} v by restarted Arnoldi with adaptive steps and local error control.
pub fn expv<A: LinearMap + ?Sized>(a: &A, t: f64, v: &[C64], opts: ExpvOptions) -> Result<ExpvOutput> {
    let n = a.dim();
    if v.len() != n {
        return Err(Error::Dimension(format!("expv: vector length {} for operator of size {n}", v.len())));
    }
    let anorm = a.norm_inf();
    let mut w = v.to_vec();
    let mut beta = norm2(&w);
    if t == 0.0 || beta == 0.0 || anorm == 0.0 {
        return Ok(ExpvOutput { w, error_estimate: 0.0, steps: 0 });
    }
    let m = opts.krylov_dim.min(n).max(1);
    let tol = opts.tol;
    let (gamma, delta) = (0.9, 1.2);
    let btol = 1e-12 * anorm;
    let rndoff = anorm * f64::EPSILON;
    let sgn = t.signum();
    let t_out = t.abs();
    let mut t_now = 0.0;
    let mut s_error = 0.0;
    let fact = (((m + 1) as f64) / std::f64::consts::E).powi(m as i32 + 1) * (2.0 * std::f64::consts::PI * (m + 1) as f64).sqrt();
    let mut t_new = (1.0 / anorm) * ((fact * tol) / (4.0 * beta * anorm)).powf(1.0 / m as f64);
    t_new = round_step(t_new);
    let mut steps = 0usize;
    let mut basis: Vec<Vec<C64>> = (0..=m).map(|_| vec![c(0.0, 0.0); n]).collect();
    let mut p = vec![c(0.0, 0.0); n];

    while t_now < t_out {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Numerical("expv: step limit exceeded".into()));
        }
        let mut t_step = (t_out - t_now).min(t_new);
        for (bi, wi) in basis[0].iter_mut().zip(&w) {
            *bi = wi / beta;
        }
        let mut h = Array2::<C64>::zeros((m + 2, m + 2));
        let mut mb = m;
        let mut k1 = 2usize;
        for j in 0..m {
            a.apply(&basis[j], &mut p);
            for i in 0..=j {
                let hij = dotc(&basis[i], &p);
                h[[i, j]] = hij;
                for (pk, bk) in p.iter_mut().zip(&basis[i]) {
                    *pk -= hij * bk;
                }
            }
            let s = norm2(&p);
            if s < btol {
                k1 = 0;
                mb = j + 1;
                t_step = t_out - t_now;
                break;
            }
            h[[j + 1, j]] = c(s, 0.0);
            for (bk, pk) in basis[j + 1].iter_mut().zip(&p) {
                *bk = pk / s;
            }
        }
        let mut avnorm = 0.0;
        if k1 != 0 {
            h[[m + 1, m]] = c(1.0, 0.0);
            a.apply(&basis[m], &mut p);
            avnorm = norm2(&p);
        }
        let mut ireject = 0;
        let (f, err_loc, xm) = loop {
            let mx = mb + k1;
            let sub = h.slice(ndarray::s![..mx, ..mx]).mapv(|z| z * (sgn * t_step));
            let f = expm_dense(&sub)?;
            if k1 == 0 {
                break (f, btol, 1.0 / m as f64);
            }
            let phi1 = (beta * f[[m, 0]]).norm();
            let phi2 = (beta * f[[m + 1, 0]] * avnorm).norm();
            let (err_loc, xm) = if phi1 > 10.0 * phi2 {
                (phi2, 1.0 / m as f64)
            } else if phi1 > phi2 {
                ((phi1 * phi2) / (phi1 - phi2), 1.0 / m as f64)
            } else {
                (phi1, 1.0 / (m as f64 - 1.0).max(1.0))
            };
            if err_loc <= delta * t_step * tol {
                break (f, err_loc, xm);
            }
            ireject += 1;
            if ireject > 20 {
                return Err(Error::Numerical("expv: requested tolerance too small".into()));
            }
            t_step = round_step(gamma * t_step * (t_step * tol / err_loc).powf(xm));
        };
        let mx = mb + k1.saturating_sub(1);
        let coeffs: Array1<C64> = f.column(0).slice(ndarray::s![..mx]).mapv(|z| z * beta);
        w.iter_mut().for_each(|z| *z = c(0.0, 0.0));
        for (k, ck) in coeffs.iter().enumerate() {
            for (wi, bi) in w.iter_mut().zip(&basis[k]) {
                *wi += ck * bi;
            }
        }
        beta = norm2(&w);
        t_now += t_step;
        if err_loc > 0.0 {
            t_new = round_step(gamma * t_step * (t_step * tol / err_loc).powf(xm));
        } else {
            t_new = t_step * 2.0;
        }
        s_error += err_loc.max(rndoff);
        if beta == 0.0 {
            break;
        }
    }
    Ok(ExpvOutput { w, error_estimate: s_error, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_rotation() {
        let th = 2.7;
        let a = ndarray::array![[c(0.0, 0.0), c(-th, 0.0)], [c(th, 0.0), c(0.0, 0.0)]];
        let e = expm_dense(&a).unwrap();
        assert!((e[[0, 0]].re - th.cos()).abs() < 1e-14);
        assert!((e[[1, 0]].re - th.sin()).abs() < 1e-14);
    }

    #[test]
    fn expv_matches_dense() {
        let n = 40;
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            let x = ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.5;
            c(x, if i == j { -1.0 } else { 0.3 * x })
        });
        let v: Vec<C64> = (0..n).map(|i| c(1.0 / (1.0 + i as f64), 0.1 * i as f64)).collect();
        let t = 3.0;
        let dense = expm_dense(&a.mapv(|z| z * t)).unwrap().dot(&Array1::from(v.clone()));
        let sp = CsrMatrix::from_dense(&a);
        let out = expv(&sp, t, &v, ExpvOptions::default()).unwrap();
        let err = out.w.iter().zip(dense.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}
