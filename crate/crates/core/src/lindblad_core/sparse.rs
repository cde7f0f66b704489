use ndarray::Array2;

use super::operator::{c, C64};

/// Compressed sparse row matrix over complex doubles.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl CsrMatrix {
    /// Duplicates are summed; entries that cancel to exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, col, v) in triplets {
            debug_assert!(r < nrows && col < ncols);
            if last == Some((r, col)) {
                *data.last_mut().unwrap() += v;
            } else {
                if let Some(z) = data.last() {
                    if *z == c(0.0, 0.0) {
                        data.pop();
                        indices.pop();
                        indptr[last.unwrap().0 + 1] -= 1;
                    }
                }
                indices.push(col);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, col));
            }
        }
        if let Some(z) = data.last() {
            if *z == c(0.0, 0.0) {
                data.pop();
                indices.pop();
                indptr[last.unwrap().0 + 1] -= 1;
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    pub fn from_dense(m: &Array2<C64>) -> Self {
        let mut t = Vec::new();
        for ((i, j), z) in m.indexed_iter() {
            if *z != c(0.0, 0.0) {
                t.push((i, j, *z));
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix { nrows: n, ncols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), data: vec![c(1.0, 0.0); n] }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows)
            .flat_map(move |r| (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.data[k])))
    }

    pub fn get(&self, r: usize, col: usize) -> C64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&col) {
            Ok(k) => self.data[self.indptr[r] + k],
            Err(_) => c(0.0, 0.0),
        }
    }

    /// y = A x
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        for (r, out) in y.iter_mut().enumerate().take(self.nrows) {
            let mut acc = c(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![c(0.0, 0.0); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(r, col, v)| (col, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn map_values(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z = f(*z));
        out
    }

    pub fn scale(&self, z: C64) -> Self {
        self.map_values(|v| v * z)
    }

    pub fn add(&self, other: &CsrMatrix) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let t = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn sub(&self, other: &CsrMatrix) -> Self {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut t = Vec::new();
        let mut acc = vec![c(0.0, 0.0); other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.ncols];
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let (mid, a) = (self.indices[k], self.data[k]);
                for kk in other.indptr[mid]..other.indptr[mid + 1] {
                    let col = other.indices[kk];
                    if !mark[col] {
                        mark[col] = true;
                        touched.push(col);
                    }
                    acc[col] += a * other.data[kk];
                }
            }
            for &col in &touched {
                t.push((r, col, acc[col]));
                acc[col] = c(0.0, 0.0);
                mark[col] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.nrows, other.ncols, t)
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.nrows, self.ncols));
        for (r, col, v) in self.triplets() {
            m[[r, col]] = v;
        }
        m
    }

    /// max column sum of moduli
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (k, &col) in self.indices.iter().enumerate() {
            sums[col] += self.data[k].norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// max row sum of moduli
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| (self.indptr[r]..self.indptr[r + 1]).map(|k| self.data[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_and_cancellation() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (1, 0, c(1.0, 0.0)), (1, 0, c(-1.0, 0.0)), (1, 1, c(0.0, 1.0))],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), c(3.0, 0.0));
        assert_eq!(m.get(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn matmul_matches_dense() {
        let a = Array2::from_shape_fn((3, 4), |(i, j)| c((i + 2 * j) as f64 % 3.0, i as f64 - j as f64));
        let b = Array2::from_shape_fn((4, 2), |(i, j)| c(1.0 + i as f64 * j as f64, (i % 2) as f64));
        let p = CsrMatrix::from_dense(&a).matmul(&CsrMatrix::from_dense(&b)).to_dense();
        let d = a.dot(&b);
        for (x, y) in p.iter().zip(d.iter()) {
            assert!((x - y).norm() < 1e-13);
        }
    }
}
