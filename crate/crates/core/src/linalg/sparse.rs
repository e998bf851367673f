use ndarray::{Axis, Zip};
use rayon::prelude::*;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Entries with magnitude below this are dropped at construction.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Compressed-sparse-row real matrix.
///
/// Column indices inside each row are strictly increasing and no stored value
/// has magnitude below [`PRUNE_THRESHOLD`]. Instances are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating every invariant.
    /// Values below the prune threshold are removed.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != rows + 1 {
            return Err(Error::shape(
                "from_csr",
                format!("row_offsets has {} entries, expected {}", row_offsets.len(), rows + 1),
            ));
        }
        if row_offsets[0] != 0 || row_offsets[rows] != col_indices.len() {
            return Err(Error::shape("from_csr", "row_offsets do not span col_indices"));
        }
        if col_indices.len() != values.len() {
            return Err(Error::shape(
                "from_csr",
                format!("{} column indices but {} values", col_indices.len(), values.len()),
            ));
        }
        for i in 0..rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::shape("from_csr", format!("row_offsets decrease at row {i}")));
            }
            let cols_in_row = &col_indices[lo..hi];
            if cols_in_row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::shape(
                    "from_csr",
                    format!("column indices of row {i} are not strictly increasing"),
                ));
            }
            if cols_in_row.last().is_some_and(|&c| c >= cols) {
                return Err(Error::shape("from_csr", format!("column index out of range in row {i}")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite value in sparse matrix".into()));
        }
        let mut m = SparseMatrix {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        };
        m.prune();
        Ok(m)
    }

    /// Builds a matrix from (row, col, value) triplets. Duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, v) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::shape(
                    "from_triplets",
                    format!("entry ({r}, {c}) outside {rows}x{cols}"),
                ));
            }
            if !v.is_finite() {
                return Err(Error::Numerical(format!("non-finite value at ({r}, {c})")));
            }
        }
        // stable sort keeps the summation order of duplicates equal to input order
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
            } else {
                row_offsets[r + 1] += 1;
                col_indices.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        for i in 0..rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        let mut m = SparseMatrix {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        };
        m.prune();
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        let triplets = m
            .indexed_iter()
            .filter(|(_, v)| **v != 0.0)
            .map(|((r, c), v)| (r, c, *v));
        Self::from_triplets(m.nrows(), m.ncols(), triplets)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros((self.rows, self.cols));
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out[[i, j]] = v;
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values stored in row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Entry (i, j), zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Largest |A[i,j] - A[j,i]|; infinite for non-square matrices.
    pub fn max_asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let slot = next[j];
                col_indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// y = A x for a single vector.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            *yi = acc;
        });
    }

    /// A · X, accumulated row by row in stored column order.
    pub fn mul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != x.nrows() {
            return Err(Error::shape(
                "sparse_dense_mul",
                format!("{}x{} times {}x{}", self.rows, self.cols, x.nrows(), x.ncols()),
            ));
        }
        let x = x.as_standard_layout();
        let d = x.ncols();
        let mut out = DenseMatrix::zeros((self.rows, d));
        if d == 0 {
            return Ok(out);
        }
        let xs = x.as_slice().expect("standard layout");
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut out_row)| {
                let out_row = out_row.as_slice_mut().expect("row of standard layout");
                let (cols, vals) = self.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    let src = &xs[j * d..(j + 1) * d];
                    for (o, s) in out_row.iter_mut().zip(src) {
                        *o += v * s;
                    }
                }
            });
        Ok(out)
    }

    /// Aᵀ · X without materializing the transpose.
    pub fn transpose_mul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != x.nrows() {
            return Err(Error::shape(
                "sparse_transpose_dense_mul",
                format!("({}x{})ᵀ times {}x{}", self.rows, self.cols, x.nrows(), x.ncols()),
            ));
        }
        let mut out = DenseMatrix::zeros((self.cols, x.ncols()));
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            let src = x.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                Zip::from(out.row_mut(j)).and(&src).for_each(|o, &s| *o += v * s);
            }
        }
        Ok(out)
    }

    /// A · B with sorted columns and pruned zeros.
    pub fn mul_sparse(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.cols != other.rows {
            return Err(Error::shape(
                "sparse_sparse_mul",
                format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols),
            ));
        }
        let width = other.cols;
        let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..self.rows)
            .into_par_iter()
            .map_init(
                || (vec![0.0f64; width], vec![false; width]),
                |(acc, seen), i| {
                    let mut touched = Vec::new();
                    let (a_cols, a_vals) = self.row(i);
                    for (&k, &a) in a_cols.iter().zip(a_vals) {
                        let (b_cols, b_vals) = other.row(k);
                        for (&j, &b) in b_cols.iter().zip(b_vals) {
                            if !seen[j] {
                                seen[j] = true;
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let mut cols = Vec::with_capacity(touched.len());
                    let mut vals = Vec::with_capacity(touched.len());
                    for j in touched {
                        let v = acc[j];
                        acc[j] = 0.0;
                        seen[j] = false;
                        if v.abs() >= PRUNE_THRESHOLD {
                            cols.push(j);
                            vals.push(v);
                        }
                    }
                    (cols, vals)
                },
            )
            .collect();
        Ok(Self::concat_rows(self.rows, width, rows))
    }

    /// Entry (i, j) becomes left[i] · A[i,j] · right[j]; a missing side counts as ones.
    pub fn diag_scale(&self, left: Option<&[f64]>, right: Option<&[f64]>) -> Result<SparseMatrix> {
        if let Some(l) = left {
            if l.len() != self.rows {
                return Err(Error::shape(
                    "diag_scale",
                    format!("left scaling has length {}, matrix has {} rows", l.len(), self.rows),
                ));
            }
        }
        if let Some(r) = right {
            if r.len() != self.cols {
                return Err(Error::shape(
                    "diag_scale",
                    format!("right scaling has length {}, matrix has {} cols", r.len(), self.cols),
                ));
            }
        }
        let scales_finite = left.into_iter().chain(right).flatten().all(|v| v.is_finite());
        if !scales_finite {
            return Err(Error::Numerical("non-finite diagonal scaling".into()));
        }
        let mut values = self.values.clone();
        for i in 0..self.rows {
            let li = left.map_or(1.0, |l| l[i]);
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                let rj = right.map_or(1.0, |r| r[self.col_indices[p]]);
                values[p] = li * values[p] * rj;
            }
        }
        let mut m = SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values,
        };
        m.prune();
        Ok(m)
    }

    /// Entry (i, j) becomes A[i,j] / sqrt(degrees[i] · degrees[j]).
    ///
    /// Equivalent to `diag_scale` with D^{-1/2} on both sides but rounds once
    /// per entry and keeps symmetric input exactly symmetric.
    pub fn normalize_symmetric(&self, degrees: &[f64]) -> Result<SparseMatrix> {
        if self.rows != self.cols || degrees.len() != self.rows {
            return Err(Error::shape(
                "normalize_symmetric",
                format!("{} degrees for a {}x{} matrix", degrees.len(), self.rows, self.cols),
            ));
        }
        if degrees.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Numerical("degrees must be positive and finite".into()));
        }
        let mut values = self.values.clone();
        for i in 0..self.rows {
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                values[p] /= (degrees[i] * degrees[self.col_indices[p]]).sqrt();
            }
        }
        let mut m = SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values,
        };
        m.prune();
        Ok(m)
    }

    fn concat_rows(rows: usize, cols: usize, parts: Vec<(Vec<usize>, Vec<f64>)>) -> SparseMatrix {
        let nnz = parts.iter().map(|(c, _)| c.len()).sum();
        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_offsets.push(0);
        for (c, v) in parts {
            col_indices.extend(c);
            values.extend(v);
            row_offsets.push(col_indices.len());
        }
        SparseMatrix {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    fn prune(&mut self) {
        if self.values.iter().all(|v| v.abs() >= PRUNE_THRESHOLD) {
            return;
        }
        let mut write = 0;
        let mut new_offsets = Vec::with_capacity(self.rows + 1);
        new_offsets.push(0);
        for i in 0..self.rows {
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                if self.values[p].abs() >= PRUNE_THRESHOLD {
                    self.col_indices[write] = self.col_indices[p];
                    self.values[write] = self.values[p];
                    write += 1;
                }
            }
            new_offsets.push(write);
        }
        self.col_indices.truncate(write);
        self.values.truncate(write);
        self.row_offsets = new_offsets;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn identity_times_dense_is_unchanged() {
        let x = array![[1.0, -2.0], [3.5, 0.0], [0.25, 7.0]];
        assert_eq!(SparseMatrix::identity(3).mul_dense(&x).unwrap(), x);
    }

    #[test]
    fn averaging_operator() {
        let s = SparseMatrix::from_dense(&array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let y = s.mul_dense(&array![[1.0], [3.0]]).unwrap();
        assert_eq!(y, array![[2.0], [2.0]]);
    }

    #[test]
    fn sparse_dense_matches_triple_loop() {
        let s = oracle::random_sparse(10, 10, 0.3, 7);
        let x = oracle::random_dense(10, 4, 7);
        let got = s.mul_dense(&x).unwrap();
        let want = oracle::dense_matmul(&s.to_dense(), &x);
        assert!(oracle::max_abs_diff(&got, &want) <= 1e-12);
    }

    #[test]
    fn identity_times_sparse_is_unchanged() {
        let b = oracle::random_sparse(5, 7, 0.4, 11);
        assert_eq!(SparseMatrix::identity(5).mul_sparse(&b).unwrap(), b);
    }

    #[test]
    fn rank_one_outer_product() {
        let a = SparseMatrix::from_dense(&array![[1.0], [1.0]]).unwrap();
        let p = a.mul_sparse(&a.transpose()).unwrap();
        assert_eq!(p.to_dense(), array![[1.0, 1.0], [1.0, 1.0]]);
    }

    #[test]
    fn sparse_sparse_matches_dense_oracle() {
        let a = oracle::random_sparse(8, 6, 0.4, 3);
        let b = oracle::random_sparse(6, 8, 0.4, 4);
        let got = a.mul_sparse(&b).unwrap().to_dense();
        let want = oracle::dense_matmul(&a.to_dense(), &b.to_dense());
        assert!(oracle::max_abs_diff(&got, &want) <= 1e-12);
    }

    #[test]
    fn products_reject_mismatched_shapes() {
        let a = SparseMatrix::identity(3);
        assert!(matches!(a.mul_dense(&DenseMatrix::zeros((2, 2))), Err(Error::Shape { .. })));
        assert!(matches!(
            a.mul_sparse(&SparseMatrix::identity(4)),
            Err(Error::Shape { .. })
        ));
        assert!(matches!(
            a.diag_scale(Some(&[1.0, 2.0]), None),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn diag_scale_cases() {
        let s = oracle::random_sparse(4, 5, 0.5, 9);
        assert_eq!(
            s.diag_scale(Some(&[1.0; 4]), Some(&[1.0; 5])).unwrap(),
            s
        );
        let d = SparseMatrix::identity(2).diag_scale(Some(&[2.0, 3.0]), None).unwrap();
        assert_eq!(d.to_dense(), array![[2.0, 0.0], [0.0, 3.0]]);

        let left = [0.5, -1.0, 2.0, 3.0];
        let right = [1.0, 0.25, -2.0, 4.0, 0.1];
        let got = s.diag_scale(Some(&left), Some(&right)).unwrap().to_dense();
        let dl = DenseMatrix::from_diag(&ndarray::Array1::from(left.to_vec()));
        let dr = DenseMatrix::from_diag(&ndarray::Array1::from(right.to_vec()));
        let want = oracle::dense_matmul(&oracle::dense_matmul(&dl, &s.to_dense()), &dr);
        assert!(oracle::max_abs_diff(&got, &want) <= 1e-14);
    }

    #[test]
    fn tiny_values_are_pruned() {
        let m = SparseMatrix::from_triplets(2, 2, [(0, 0, 1e-16), (1, 1, 2.0), (1, 1, -2.0), (0, 1, 1.0)])
            .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 1.0);
    }

    #[test]
    fn from_csr_validates() {
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1, 2], vec![1, 0], vec![1.0, 2.0]).is_ok());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 2, 2], vec![1, 0], vec![1.0, 2.0]).is_err());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1, 2], vec![1, 2], vec![1.0, 2.0]).is_err());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1], vec![1], vec![1.0]).is_err());
    }

    #[test]
    fn transpose_product_matches_explicit_transpose() {
        let s = oracle::random_sparse(6, 4, 0.5, 21);
        let x = oracle::random_dense(6, 3, 22);
        let a = s.transpose_mul_dense(&x).unwrap();
        let b = s.transpose().mul_dense(&x).unwrap();
        assert!(oracle::max_abs_diff(&a, &b) <= 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn products_agree_with_dense_oracles(
            n in 1usize..64, m in 1usize..64, d in 1usize..8,
            density in 0.05f64..0.6, seed in any::<u64>(),
        ) {
            let a = oracle::random_sparse(n, m, density, seed);
            let b = oracle::random_sparse(m, n, density, seed.wrapping_add(1));
            let x = oracle::random_dense(m, d, seed.wrapping_add(2));
            let ad = a.to_dense();
            prop_assert!(oracle::max_abs_diff(&a.mul_dense(&x).unwrap(), &oracle::dense_matmul(&ad, &x)) <= 1e-12);
            let p = a.mul_sparse(&b).unwrap();
            prop_assert!(oracle::max_abs_diff(&p.to_dense(), &oracle::dense_matmul(&ad, &b.to_dense())) <= 1e-12);
            for i in 0..p.rows() {
                prop_assert!(p.row(i).0.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn products_are_deterministic(seed in any::<u64>()) {
            let a = oracle::random_sparse(30, 30, 0.2, seed);
            let x = oracle::random_dense(30, 5, seed ^ 1);
            let first = a.mul_dense(&x).unwrap();
            let second = a.mul_dense(&x).unwrap();
            prop_assert!(first.iter().zip(second.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }
}
