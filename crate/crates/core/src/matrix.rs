//! Dense square-ish matrices, block partitions and the structural
//! predicates used throughout the crate.
//!
//! Block operations never use a separate block type: a [`BlockPartition`]
//! maps every scalar index to its block index and the scalar routines make
//! their pattern decisions on block indices instead.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    /// Wraps row-major data, rejecting non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let m = Matrix { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix, or `NotSquare`.
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::NonFinite {
                row: k / self.cols,
                col: k % self.cols,
            }),
            None => Ok(()),
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "vector length mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn pow(&self, k: usize) -> Matrix {
        let mut out = Matrix::identity(self.rows);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        sums
    }

    /// `B[i][j] = A[perm[i]][perm[j]]`, i.e. `Π A Πᵀ` for the permutation
    /// matrix whose i-th row is `e_{perm[i]}`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Matrix {
        Matrix::from_fn(perm.len(), perm.len(), |i, j| self[(perm[i], perm[j])])
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows.start + i, cols.start + j)]
        })
    }

    /// Entrywise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.data.iter().all(|&v| v >= -tol)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for v in self.row(i) {
                write!(f, "{v:>12.5e} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf_vec(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Ordered block sizes `(n_1, ..., n_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockPartition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("block {k} has size 0")));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        for s in &sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        Ok(BlockPartition { sizes, offsets })
    }

    /// Every index its own block.
    pub fn scalar(n: usize) -> Self {
        BlockPartition::new(vec![1; n]).expect("n > 0")
    }

    pub fn uniform(blocks: usize, size: usize) -> Result<Self> {
        BlockPartition::new(vec![size; blocks])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, block: usize) -> std::ops::Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    pub fn is_scalar(&self) -> bool {
        self.sizes.iter().all(|&s| s == 1)
    }

    /// Block index of every scalar index.
    pub fn block_index(&self) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.total());
        for (b, &s) in self.sizes.iter().enumerate() {
            idx.extend(std::iter::repeat(b).take(s));
        }
        idx
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.total() == dim {
            Ok(())
        } else {
            Err(Error::PartitionMismatch {
                total: self.total(),
                dim,
            })
        }
    }

    /// The partition with its blocks in reverse order.
    pub fn reversed(&self) -> BlockPartition {
        BlockPartition::new(self.sizes.iter().rev().copied().collect()).unwrap()
    }

    /// Drops the last `k` scalar indices, shrinking or removing trailing blocks.
    pub fn truncated(&self, k: usize) -> Result<BlockPartition> {
        let mut sizes = self.sizes.clone();
        let mut left = k;
        while left > 0 {
            let last = sizes
                .last_mut()
                .ok_or_else(|| Error::InvalidPartition("truncated to nothing".into()))?;
            let take = left.min(*last);
            *last -= take;
            left -= take;
            if *last == 0 {
                sizes.pop();
            }
        }
        BlockPartition::new(sizes)
    }
}

/// Resolves an optional partition against a matrix dimension.
pub(crate) fn resolve_partition(
    partition: Option<&BlockPartition>,
    dim: usize,
) -> Result<BlockPartition> {
    match partition {
        Some(p) => {
            p.check_dim(dim)?;
            Ok(p.clone())
        }
        None => Ok(BlockPartition::scalar(dim)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Diag,
    Tril,
    Triu,
    StrictTril,
    StrictTriu,
    Tridiag,
}

impl Part {
    #[inline]
    pub(crate) fn keeps(self, bi: usize, bj: usize) -> bool {
        match self {
            Part::Diag => bi == bj,
            Part::Tril => bi >= bj,
            Part::Triu => bi <= bj,
            Part::StrictTril => bi > bj,
            Part::StrictTriu => bi < bj,
            Part::Tridiag => bi.abs_diff(bj) <= 1,
        }
    }
}

/// Copies the entries of `a` on the selected (block) pattern; zeros elsewhere.
pub fn part_extract(a: &Matrix, part: Part, partition: Option<&BlockPartition>) -> Result<Matrix> {
    let n = a.dim()?;
    let p = resolve_partition(partition, n)?;
    Ok(extract_with(a, &p, |bi, bj| part.keeps(bi, bj)))
}

pub(crate) fn extract_with(
    a: &Matrix,
    p: &BlockPartition,
    keep: impl Fn(usize, usize) -> bool,
) -> Matrix {
    let block = p.block_index();
    Matrix::from_fn(a.rows(), a.cols(), |i, j| {
        if keep(block[i], block[j]) {
            a[(i, j)]
        } else {
            0.0
        }
    })
}

/// True iff every entry strictly above the first (block) superdiagonal is
/// at most `tol` in magnitude.
pub fn is_lower_hessenberg(a: &Matrix, partition: Option<&BlockPartition>, tol: f64) -> bool {
    let Ok(n) = a.dim() else { return false };
    let Ok(p) = resolve_partition(partition, n) else {
        return false;
    };
    let block = p.block_index();
    (0..n).all(|i| (0..n).all(|j| block[j] <= block[i] + 1 || a[(i, j)].abs() <= tol))
}

pub fn is_z_matrix(a: &Matrix, tol: f64) -> bool {
    first_positive_offdiag(a, tol).is_none()
}

fn first_positive_offdiag(a: &Matrix, tol: f64) -> Option<(usize, usize, f64)> {
    for i in 0..a.rows() {
        for (j, &v) in a.row(i).iter().enumerate() {
            if i != j && v > tol {
                return Some((i, j, v));
            }
        }
    }
    None
}

/// Witness that a Z-matrix is an M-matrix: `u > 0`, `v = A u >= 0`, `v != 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MMatrixCertificate {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// How far `A u` had to be clamped to produce a nonnegative `v`.
    pub residual_norm: f64,
}

const PERRON_STEPS: usize = 200;

/// Looks for `u > 0` with `A u >= 0` and some entry of `A u` positive.
///
/// With `u` omitted this tries the all-ones vector, then a Perron-like vector
/// from power steps on the nonnegative part `sI - A`, then `A⁻¹ 1`. A
/// `CertificateNotFound` error means none of those worked, not that `A` is
/// not an M-matrix.
pub fn certify_m_matrix(a: &Matrix, u: Option<&[f64]>, tol: f64) -> Result<MMatrixCertificate> {
    let n = a.dim()?;
    if let Some((row, col, value)) = first_positive_offdiag(a, tol) {
        return Err(Error::NotZMatrix { row, col, value });
    }
    if let Some(u) = u {
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }
        return try_certificate(a, u, tol).ok_or(Error::CertificateNotFound);
    }

    let ones = vec![1.0; n];
    if let Some(c) = try_certificate(a, &ones, tol) {
        return Ok(c);
    }
    if let Some(c) = try_certificate(a, &perron_like_vector(a), tol) {
        return Ok(c);
    }
    if let Ok(lu) = crate::lu::Lu::factor(a) {
        let mut x = ones;
        lu.solve_in_place(&mut x);
        if let Some(c) = try_certificate(a, &x, tol) {
            return Ok(c);
        }
    }
    Err(Error::CertificateNotFound)
}

fn try_certificate(a: &Matrix, u: &[f64], tol: f64) -> Option<MMatrixCertificate> {
    if !u.iter().all(|&x| x > 0.0 && x.is_finite()) {
        return None;
    }
    let w = a.mul_vec(u);
    if w.iter().any(|&x| x < -tol) || !w.iter().any(|&x| x > tol) {
        return None;
    }
    let v: Vec<f64> = w.iter().map(|&x| x.max(0.0)).collect();
    let residual_norm = w.iter().zip(&v).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Some(MMatrixCertificate {
        u: u.to_vec(),
        v,
        residual_norm,
    })
}

fn perron_like_vector(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let s = a.diagonal().into_iter().fold(0.0, f64::max);
    // B = sI - A is nonnegative for a Z-matrix; iterate with I + B so the
    // vector stays strictly positive.
    let mut x = vec![1.0; n];
    for _ in 0..PERRON_STEPS {
        let ax = a.mul_vec(&x);
        let mut y: Vec<f64> = x
            .iter()
            .zip(&ax)
            .map(|(&xi, &axi)| xi + s * xi - axi)
            .collect();
        let norm = norm_inf_vec(&y);
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        y.iter_mut().for_each(|v| *v /= norm);
        x = y;
    }
    x
}

/// Strong connectivity of the graph with an edge `i -> j` for every nonzero
/// off-diagonal `A_ij`.
pub fn is_irreducible(a: &Matrix) -> bool {
    let Ok(n) = a.dim() else { return false };
    if n == 1 {
        return true;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let v = if forward { a[(i, j)] } else { a[(j, i)] };
                if i != j && v != 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}
