//! Compressed sparse row matrices over `Complex64`.
//!
//! This is deliberately small: the solvers only need construction from
//! triplets, matrix-vector and matrix-matrix products, sums, Kronecker
//! products, and conversion to dense. Dimensions stay at desk scale
//! (operators up to 2^12, superoperators up to a few thousand rows), so
//! clarity wins over tuning.

use ndarray::Array2;
use num_complex::Complex64;

const DROP_TOL: f64 = 0.0;

/// Sparse complex matrix in CSR layout. Entries within a row are stored with
/// strictly increasing column indices and no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Build from (row, col, value) triplets. Duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Self {
        let mut entries: Vec<(usize, usize, Complex64)> = triplets
            .into_iter()
            .inspect(|&(r, c, _)| {
                assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            })
            .collect();
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        // merge consecutive duplicates
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some((lr, lc, lv)) if *lr == r && *lc == c => *lv += v,
                _ => merged.push((r, c, v)),
            }
        }

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for (r, c, v) in merged {
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] = col_idx.len();
        }
        for r in 0..nrows {
            if row_ptr[r + 1] < row_ptr[r] {
                row_ptr[r + 1] = row_ptr[r];
            }
        }
        let mut m = Self { nrows, ncols, row_ptr, col_idx, values };
        m.prune(DROP_TOL);
        m
    }

    pub fn from_dense(a: &Array2<Complex64>, tol: f64) -> Self {
        let (nrows, ncols) = a.dim();
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = a[(i, j)];
                if v.norm() > tol {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[Complex64]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Drop entries with |v| <= tol.
    pub fn prune(&mut self, tol: f64) {
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        let mut row_ptr = vec![0usize; self.nrows + 1];
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[k].norm() > tol {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        self.col_idx = col_idx;
        self.values = values;
        self.row_ptr = row_ptr;
    }

    /// y = A x into a caller-provided buffer.
    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.ncols, "matvec: dimension mismatch");
        assert_eq!(y.len(), self.nrows, "matvec: dimension mismatch");
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// Sparse-sparse product (Gustavson with a dense accumulator row).
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows, "matmul: dimension mismatch");
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![Complex64::new(0.0, 0.0); other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut cols_in_row: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            cols_in_row.clear();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.values[k];
                let mid = self.col_idx[k];
                for k2 in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[k2];
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = Complex64::new(0.0, 0.0);
                        cols_in_row.push(c);
                    }
                    acc[c] += a * other.values[k2];
                }
            }
            cols_in_row.sort_unstable();
            for &c in &cols_in_row {
                if acc[c].norm() > DROP_TOL {
                    col_idx.push(c);
                    values.push(acc[c]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        CsrMatrix { nrows: self.nrows, ncols: other.ncols, row_ptr, col_idx, values }
    }

    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &CsrMatrix) -> CsrMatrix {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    /// self + factor * other.
    pub fn add_scaled(&self, other: &CsrMatrix, factor: Complex64) -> CsrMatrix {
        assert_eq!(
            (self.nrows, self.ncols),
            (other.nrows, other.ncols),
            "add: dimension mismatch"
        );
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.nrows {
            let (mut i, hi_a) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let (mut j, hi_b) = (other.row_ptr[r], other.row_ptr[r + 1]);
            while i < hi_a || j < hi_b {
                let (c, v) = if j >= hi_b || (i < hi_a && self.col_idx[i] < other.col_idx[j]) {
                    let out = (self.col_idx[i], self.values[i]);
                    i += 1;
                    out
                } else if i >= hi_a || other.col_idx[j] < self.col_idx[i] {
                    let out = (other.col_idx[j], factor * other.values[j]);
                    j += 1;
                    out
                } else {
                    let out = (self.col_idx[i], self.values[i] + factor * other.values[j]);
                    i += 1;
                    j += 1;
                    out
                };
                col_idx.push(c);
                values.push(v);
            }
            row_ptr[r + 1] = col_idx.len();
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }

    pub fn scale(&self, factor: Complex64) -> CsrMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
        }
        out
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![Complex64::new(0.0, 0.0); self.nnz()];
        let mut next = counts.clone();
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let dst = next[c];
                next[c] += 1;
                col_idx[dst] = r;
                values[dst] = self.values[k];
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CsrMatrix {
        let mut out = self.transpose();
        for v in &mut out.values {
            *v = v.conj();
        }
        out
    }

    pub fn conj(&self) -> CsrMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = v.conj();
        }
        out
    }

    /// Kronecker product self ⊗ other.
    pub fn kron(&self, other: &CsrMatrix) -> CsrMatrix {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(self.nnz() * other.nnz());
        let mut values = Vec::with_capacity(self.nnz() * other.nnz());
        for ra in 0..self.nrows {
            for rb in 0..other.nrows {
                for ka in self.row_ptr[ra]..self.row_ptr[ra + 1] {
                    let (ca, va) = (self.col_idx[ka], self.values[ka]);
                    for kb in other.row_ptr[rb]..other.row_ptr[rb + 1] {
                        col_idx.push(ca * other.ncols + other.col_idx[kb]);
                        values.push(va * other.values[kb]);
                    }
                }
                row_ptr[ra * other.nrows + rb + 1] = col_idx.len();
            }
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut a = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                a[(r, self.col_idx[k])] = self.values[k];
            }
        }
        a
    }

    /// Largest entry magnitude (0 for an empty matrix).
    pub fn norm_max(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        let mut t = Complex64::new(0.0, 0.0);
        for r in 0..self.nrows.min(self.ncols) {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] == r {
                    t += self.values[k];
                }
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 1.0)), (1, 0, c(0.5, 0.0))],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.to_dense()[(0, 1)], c(3.0, 1.0));
        assert_eq!(m.to_dense()[(1, 0)], c(0.5, 0.0));
    }

    #[test]
    fn matmul_matches_dense() {
        let a = CsrMatrix::from_triplets(
            2,
            3,
            vec![(0, 0, c(1.0, 1.0)), (0, 2, c(2.0, 0.0)), (1, 1, c(0.0, -1.0))],
        );
        let b = CsrMatrix::from_triplets(
            3,
            2,
            vec![(0, 1, c(1.0, 0.0)), (1, 0, c(3.0, 0.0)), (2, 1, c(0.0, 2.0))],
        );
        let ab = a.matmul(&b).to_dense();
        let ad = a.to_dense();
        let bd = b.to_dense();
        let mut expect = Array2::<Complex64>::zeros((2, 2));
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    expect[(i, j)] += ad[(i, k)] * bd[(k, j)];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((ab[(i, j)] - expect[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn kron_and_adjoint() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c(0.0, 1.0))]);
        let i2 = CsrMatrix::identity(2);
        let k = a.kron(&i2);
        assert_eq!(k.nrows(), 4);
        let kd = k.to_dense();
        assert_eq!(kd[(0, 2)], c(0.0, 1.0));
        assert_eq!(kd[(1, 3)], c(0.0, 1.0));
        let adj = a.adjoint().to_dense();
        assert_eq!(adj[(1, 0)], c(0.0, -1.0));
    }

    #[test]
    fn add_merges_columns() {
        let a = CsrMatrix::from_triplets(1, 3, vec![(0, 0, c(1.0, 0.0)), (0, 2, c(1.0, 0.0))]);
        let b = CsrMatrix::from_triplets(1, 3, vec![(0, 1, c(2.0, 0.0)), (0, 2, c(-1.0, 0.0))]);
        let s = a.add(&b).to_dense();
        assert_eq!(s[(0, 0)], c(1.0, 0.0));
        assert_eq!(s[(0, 1)], c(2.0, 0.0));
        assert_eq!(s[(0, 2)], c(0.0, 0.0));
    }
}
