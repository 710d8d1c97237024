//! Dense complex square matrices and the handful of decompositions the
//! metric constructions need.
//!
//! [`ComplexMatrix`] is the universal operator representation. It wraps a
//! `faer` matrix and keeps the square shape as an invariant; rectangular
//! intermediates stay inside the modules that need them.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square matrix of complex amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    inner: Mat<C64>,
}

/// Shared on-disk matrix layout: row-major `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = MetricError;

    fn try_from(value: MatrixJson) -> Result<Self> {
        if value.dim == 0 {
            return Err(MetricError::InvalidParameter("matrix dimension must be positive".into()));
        }
        if value.entries.len() != value.dim * value.dim {
            return Err(MetricError::DimensionMismatch { expected: value.dim * value.dim, found: value.entries.len() });
        }
        let m = ComplexMatrix::from_fn(value.dim, |i, j| {
            let [re, im] = value.entries[i * value.dim + j];
            C64::new(re, im)
        });
        if !m.is_finite() {
            return Err(MetricError::NonFinite("matrix entries".into()));
        }
        Ok(m)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let dim = m.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixJson { dim, entries }
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { inner: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: Mat::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { inner: Mat::from_fn(dim, dim, f) }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Builds a matrix from rows; every row must have the same length as the
    /// number of rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(MetricError::InvalidParameter("empty matrix".into()));
        }
        for row in rows {
            if row.len() != dim {
                return Err(MetricError::DimensionMismatch { expected: dim, found: row.len() });
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Square matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let dim = cols.len();
        for c in cols {
            if c.len() != dim {
                return Err(MetricError::DimensionMismatch { expected: dim, found: c.len() });
            }
        }
        Ok(Self::from_fn(dim, |i, j| cols[j][i]))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self[(i, j)]).collect()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint().to_owned() }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self::from_fn(self.dim(), |i, j| self[(i, j)] * z)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.dim());
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim(), |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                m = m.max(self[(i, j)].norm());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim()).all(|i| (0..self.dim()).all(|j| self[(i, j)].is_finite()))
    }

    /// Principal submatrix on the given indices.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    /// Singular values in nonincreasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let s =
            self.inner.singular_values().map_err(|e| MetricError::Decomposition(format!("singular values: {e:?}")))?;
        Ok(s)
    }

    /// Ratio of smallest to largest singular value; zero for the zero matrix.
    pub fn inverse_condition(&self) -> Result<f64> {
        let s = self.singular_values()?;
        let max = s.first().copied().unwrap_or(0.0);
        let min = s.last().copied().unwrap_or(0.0);
        Ok(if max > 0.0 { min / max } else { 0.0 })
    }

    /// Inverse via partial-pivoting LU, rejected when the inverse condition
    /// number falls below `rcond`.
    pub fn inverse(&self, rcond: f64) -> Result<Self> {
        let ratio = self.inverse_condition()?;
        if ratio <= rcond {
            return Err(MetricError::Singular { ratio });
        }
        Ok(Self { inner: self.inner.partial_piv_lu().inverse() })
    }

    /// Eigenvalues and unit-norm right eigenvectors (as columns) of a general
    /// complex matrix.
    pub fn eigen(&self) -> Result<(Vec<C64>, Self)> {
        let evd = self.inner.eigen().map_err(|e| MetricError::Decomposition(format!("eigendecomposition: {e:?}")))?;
        let values: Vec<C64> = evd.S().column_vector().iter().copied().collect();
        let vectors = evd.U().to_owned();
        Ok((values, Self { inner: vectors }))
    }

    /// Full SVD `self = U·diag(s)·V†`, singular values nonincreasing.
    pub fn svd(&self) -> Result<(Self, Vec<f64>, Self)> {
        let svd = self.inner.svd().map_err(|e| MetricError::Decomposition(format!("svd: {e:?}")))?;
        let s = svd.S().column_vector().iter().map(|z| z.re).collect();
        Ok((Self { inner: svd.U().to_owned() }, s, Self { inner: svd.V().to_owned() }))
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian
    /// part of the matrix.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, Self)> {
        let h = self.hermitian_part();
        let evd = h
            .inner
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| MetricError::Decomposition(format!("hermitian eigendecomposition: {e:?}")))?;
        let values = evd.S().column_vector().iter().map(|z| z.re).collect();
        Ok((values, Self { inner: evd.U().to_owned() }))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.inner[(i, j)]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.inner[(i, j)]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix product dimension mismatch");
        ComplexMatrix { inner: &self.inner * &rhs.inner }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix sum dimension mismatch");
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix difference dimension mismatch");
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }
}

/// Dirac inner product `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scaled(v: &[C64], z: C64) -> Vec<C64> {
    v.iter().map(|x| x * z).collect()
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn unit_vector(dim: usize, k: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[k] = ONE;
    v
}

/// `|u⟩⟨v|`.
pub fn outer(u: &[C64], v: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(u.len(), |i, j| u[i] * v[j].conj())
}

/// Minimum-norm least-squares solution of `a·x = b` through the SVD, with
/// singular values below `rcond·σ_max` treated as zero. Returns the solution
/// and the relative residual `‖a·x − b‖ / ‖b‖`.
pub fn min_norm_solve(a: &ComplexMatrix, b: &[C64], rcond: f64) -> Result<(Vec<C64>, f64)> {
    let n = a.dim();
    if b.len() != n {
        return Err(MetricError::DimensionMismatch { expected: n, found: b.len() });
    }
    let svd = a.inner.svd().map_err(|e| MetricError::Decomposition(format!("svd: {e:?}")))?;
    let u = svd.U();
    let v = svd.V();
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let cutoff = rcond * s.first().copied().unwrap_or(0.0);
    let mut x = vec![ZERO; n];
    for k in 0..n {
        if s[k] <= cutoff || s[k] == 0.0 {
            continue;
        }
        let mut coeff = ZERO;
        for i in 0..n {
            coeff += u[(i, k)].conj() * b[i];
        }
        coeff /= s[k];
        for i in 0..n {
            x[i] += v[(i, k)] * coeff;
        }
    }
    let bn = norm(b);
    let residual = norm(&sub(&a.apply(&x), b));
    let rel = if bn > 0.0 { residual / bn } else { residual };
    Ok((x, rel))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn json_round_trip_keeps_layout() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0), c(3.0, 0.0)], vec![c(0.0, -1.0), c(4.5, 0.5)]]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"dim":2,"entries":[[1.0,2.0],[3.0,0.0],[0.0,-1.0],[4.5,0.5]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_rejects_wrong_entry_count() {
        let err = serde_json::from_str::<ComplexMatrix>(r#"{"dim":2,"entries":[[1.0,0.0]]}"#);
        assert!(err.is_err());
    }

    #[test]
    fn min_norm_on_rank_deficient_diagonal() {
        let a = ComplexMatrix::from_real_diagonal(&[2.0, 0.0]);
        let (x, res) = min_norm_solve(&a, &[ONE, ZERO], 1e-12).unwrap();
        assert!((x[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(x[1].norm() < 1e-15);
        assert!(res < 1e-15);
    }

    #[test]
    fn inverse_rejects_singular() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(a.inverse(1e-12), Err(MetricError::Singular { .. })));
    }

    #[test]
    fn eigen_of_diagonal() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let (vals, vecs) = a.eigen().unwrap();
        let mut re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] - 1.0).abs() < 1e-14 && (re[1] - 2.0).abs() < 1e-14);
        for k in 0..2 {
            assert!((norm(&vecs.column(k)) - 1.0).abs() < 1e-14);
        }
    }
}
