use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::generator::Superoperator;
use super::operator::{c, Operator, C64};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    pub is_tp: bool,
    pub is_cp: bool,
    pub min_choi_eigenvalue: f64,
    /// max |Tr_out C − I| entry
    pub tp_deviation: f64,
}

/// C = Σ_kl |k⟩⟨l| ⊗ Λ(|k⟩⟨l|), input factor slow.
pub fn choi_matrix(map: &Superoperator) -> Result<Operator> {
    let n = map.dim();
    let dense = map.matrix().to_dense();
    let m = Array2::from_shape_fn((n * n, n * n), |(r, col)| {
        let (k, i) = (r / n, r % n);
        let (l, j) = (col / n, col % n);
        dense[[i + n * j, k + n * l]]
    });
    Operator::from_array(m)
}

pub fn cptp_check(map: &Superoperator, tol: f64) -> Result<CptpReport> {
    let n = map.dim();
    let choi = choi_matrix(map)?;
    let cm = choi.as_array();
    let mut tp_deviation: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            let s: C64 = (0..n).map(|i| cm[[k * n + i, l * n + i]]).sum();
            let target = if k == l { c(1.0, 0.0) } else { c(0.0, 0.0) };
            tp_deviation = tp_deviation.max((s - target).norm());
        }
    }
    let herm_dev = choi.hermitian_deviation();
    let min_choi_eigenvalue = choi.hermitian_part().eigvalsh()?[0];
    Ok(CptpReport {
        is_tp: tp_deviation <= tol,
        is_cp: herm_dev <= tol && min_choi_eigenvalue >= -tol,
        min_choi_eigenvalue,
        tp_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad_core::generator::SuperoperatorKind;

    #[test]
    fn transpose_is_not_cp() {
        let n = 3;
        let t = (0..n * n).map(|k| ((k % n) * n + k / n, k, c(1.0, 0.0))).collect();
        let m = crate::lindblad_core::sparse::CsrMatrix::from_triplets(n * n, n * n, t);
        let s = Superoperator::new(n, m, SuperoperatorKind::Map).unwrap();
        let r = cptp_check(&s, 1e-10).unwrap();
        assert!(r.is_tp);
        assert!(!r.is_cp);
        assert!((r.min_choi_eigenvalue + 1.0).abs() < 1e-12);
    }
}
