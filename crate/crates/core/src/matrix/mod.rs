//! Dense complex matrices and the spectral kernel built on them.
//!
//! Everything downstream (norms of algebra elements, proximal steps,
//! certificate extraction) reduces to [`svd`] on individual blocks.

mod schatten;
mod svd;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use schatten::{polar_decompose, project_l1_ball, project_nuclear_ball, prox_schatten, schatten_norm, PolarResult};
pub use svd::{svd, svd_with, SvdConfig, SvdResult};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Which Schatten norm a problem is posed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// Largest singular value (the C*-norm).
    Operator,
    /// Sum of singular values.
    Trace,
}

impl NormKind {
    /// The norm dual to `self` under the trace pairing.
    pub fn dual(self) -> NormKind {
        match self {
            NormKind::Operator => NormKind::Trace,
            NormKind::Trace => NormKind::Operator,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Operator => "operator",
            NormKind::Trace => "trace",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "operator" => Ok(NormKind::Operator),
            "trace" => Ok(NormKind::Trace),
            other => Err(Error::InvalidArgument(format!("unknown norm kind {other:?}"))),
        }
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let m = Matrix { rows, cols, data };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    /// Real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Matrix::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Real square matrix from nested rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        let mut out = Matrix::zeros(n, m);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), m, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                out[(i, j)] = C64::new(v, 0.0);
            }
        }
        out
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Matrix::from_diag(&diag.iter().map(|&d| C64::new(d, 0.0)).collect::<Vec<_>>())
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Unit matrix e_{row,col}.
    pub fn unit(rows: usize, cols: usize, row: usize, col: usize) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        m[(row, col)] = ONE;
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Columns `range` as a new matrix.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Matrix {
        let mut m = Matrix::zeros(self.rows, range.len());
        for (jj, j) in range.enumerate() {
            for i in 0..self.rows {
                m[(i, jj)] = self[(i, j)];
            }
        }
        m
    }

    /// Top-left `rows x cols` corner.
    pub fn corner(&self, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows.min(self.rows) {
            for j in 0..cols.min(self.cols) {
                m[(i, j)] = self[(i, j)];
            }
        }
        m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let mut m = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        let mut m = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^H * rhs` without forming the adjoint.
    pub fn adjoint_matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows);
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    /// `self * rhs^H` without forming the adjoint.
    pub fn matmul_adjoint(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.cols);
        let mut out = Matrix::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            for j in 0..rhs.rows {
                let mut acc = ZERO;
                for k in 0..self.cols {
                    acc += self.data[i * self.cols + k] * rhs.data[j * rhs.cols + k].conj();
                }
                out.data[i * rhs.rows + j] = acc;
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: C64, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `trace(self * rhs)` in O(n^2).
    pub fn trace_product(&self, rhs: &Matrix) -> C64 {
        assert_eq!((self.rows, self.cols), (rhs.cols, rhs.rows));
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * rhs.data[k * rhs.cols + i];
            }
        }
        acc
    }

    /// Frobenius inner product `sum conj(self_ij) * rhs_ij`.
    pub fn frobenius_inner(&self, rhs: &Matrix) -> C64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data.iter().zip(&rhs.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(self + self^H) / 2`; panics for non-square input.
    pub fn hermitian_part(&self) -> Matrix {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        m
    }

    /// `U diag(s) V^H` for the leading `s.len()` columns of `u` and `v`.
    pub fn from_svd_parts(u: &Matrix, s: &[f64], v: &Matrix) -> Matrix {
        let r = s.len();
        assert!(u.cols >= r && v.cols >= r);
        let mut out = Matrix::zeros(u.rows, v.rows);
        for k in 0..r {
            if s[k] == 0.0 {
                continue;
            }
            for i in 0..u.rows {
                let a = u[(i, k)] * s[k];
                if a == ZERO {
                    continue;
                }
                for j in 0..v.rows {
                    out.data[i * v.rows + j] += a * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale_real(-1.0)
    }
}

/// Orthonormalizes `vectors` against `basis` (twice, classical Gram-Schmidt)
/// and appends the survivors to `basis`. Vectors whose remaining norm falls
/// below `drop_tol` times their original norm are discarded.
pub(crate) fn extend_orthonormal(basis: &mut Vec<Vec<C64>>, candidate: &[C64], drop_tol: f64) -> bool {
    let original = candidate.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if original == 0.0 {
        return false;
    }
    let mut w = candidate.to_vec();
    for _ in 0..2 {
        for q in basis.iter() {
            let proj: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= proj * qi;
            }
        }
    }
    let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm <= drop_tol * original {
        return false;
    }
    for wi in w.iter_mut() {
        *wi /= nrm;
    }
    basis.push(w);
    true
}

/// Completes orthonormal `basis` (vectors of length `dim`) to `target` vectors
/// by sweeping the standard basis.
pub(crate) fn complete_orthonormal(basis: &mut Vec<Vec<C64>>, dim: usize, target: usize) {
    let mut e = 0;
    while basis.len() < target && e < dim {
        let mut cand = vec![ZERO; dim];
        cand[e] = ONE;
        extend_orthonormal(basis, &cand, 1e-8);
        e += 1;
    }
}
