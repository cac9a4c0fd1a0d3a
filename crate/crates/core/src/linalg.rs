//! Small dense linear algebra: a row-major [`Matrix`], symmetric matrices, a
//! cyclic Jacobi eigensolver and the matrix functions built on it.
//!
//! Dimensions in this crate are small (tens, rarely more), so everything is a
//! plain `Vec<f64>` and the algorithms favour determinism and accuracy over
//! asymptotic speed.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative singularity tolerance: an eigenvalue `<= 1e-10 * lambda_max`
/// is treated as zero.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-14;

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Adds `c * u v^T` in place.
    pub fn add_outer(&mut self, c: f64, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (i, &ui) in u.iter().enumerate() {
            let cu = c * ui;
            for (j, &vj) in v.iter().enumerate() {
                self.data[i * self.cols + j] += cu * vj;
            }
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Square symmetric matrix. Construction symmetrizes `(M + M^T) / 2`.
#[derive(Clone, PartialEq, Debug)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                found: m.cols,
            });
        }
        if !m.is_finite() {
            return Err(Error::NonFinite { what: "matrix" });
        }
        let n = m.rows;
        let mut s = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Ok(Self(s))
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.0.mul_vec(v)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = Matrix::deserialize(d)?;
        SymMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored as the columns of `eigenvectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    /// `Q f(Λ) Q^T`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.eigenvalues.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let q = self.eigenvector(k);
            out.add_outer(f(lambda), &q, &q);
        }
        out
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius mass is at most `1e-14 * ||M||_F`.
/// Eigenvalues come back ascending; each eigenvector's largest-magnitude
/// component is made positive so results are reproducible bit for bit.
pub fn eigh(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut q = Matrix::identity(n);
    let target = JACOBI_REL_TOL * a.frobenius_norm();

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);
    while off > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                what: "jacobi eigensolver",
                iterations: sweeps,
                residual: off,
            });
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let arr = a[(r, r)];
                // Rotation angle from theta = (a_rr - a_pp) / (2 a_pr),
                // taking the smaller root for stability.
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akr = a[(k, r)];
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let ark = a[(r, k)];
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
                a[(p, r)] = 0.0;
                a[(r, p)] = 0.0;
                a[(p, p)] = app - t * apr;
                a[(r, r)] = arr + t * apr;

                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));

    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = q.column(src);
        let mut pivot = 0;
        for k in 1..n {
            if col[k].abs() > col[pivot].abs() {
                pivot = k;
            }
        }
        if n > 0 && col[pivot] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        for (k, x) in col.into_iter().enumerate() {
            eigenvectors[(k, dst)] = x;
        }
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Inverse and inverse square root of a positive definite matrix.
///
/// `tol` is absolute: the call fails with [`Error::SingularMatrix`] when
/// `lambda_min <= tol`. Use [`relative_tol`] for the scale-invariant default.
pub fn inv_and_invsqrt(m: &SymMatrix, tol: f64) -> Result<(SymMatrix, SymMatrix)> {
    let eig = eigh(m)?;
    inv_and_invsqrt_from(m, &eig, tol)
}

pub(crate) fn inv_and_invsqrt_from(
    m: &SymMatrix,
    eig: &EigenDecomposition,
    tol: f64,
) -> Result<(SymMatrix, SymMatrix)> {
    let lambda_min = eig.min();
    if lambda_min <= tol {
        return Err(Error::SingularMatrix { lambda_min, tol });
    }
    let x = eig.apply_fn(|l| 1.0 / l);
    // One refinement step X + X (I - M X). The residual cancels to about
    // cond(M) * eps in plain arithmetic, so it is accumulated exactly.
    let r = identity_residual(m.as_matrix(), &x);
    let inv = SymMatrix::new(x.add(&x.matmul(&r)?)?)?;
    // Square root taken through the inverse's own eigenbasis, where the small
    // eigenvalues of M have become the dominant, well-resolved ones.
    let inv_eig = eigh(&inv)?;
    let invsqrt = SymMatrix::new(inv_eig.apply_fn(|l| l.max(0.0).sqrt()))?;
    Ok((inv, invsqrt))
}

/// Singular values of `m` in descending order, by one-sided (Hestenes)
/// Jacobi on the columns of the taller orientation. Small singular values are
/// resolved to roughly machine precision times the largest one.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let a = if m.rows >= m.cols {
        m.clone()
    } else {
        m.transpose()
    };
    let (rows, cols) = a.shape();
    let mut colv: Vec<Vec<f64>> = (0..cols).map(|j| a.column(j)).collect();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&colv[p], &colv[p]);
                let beta = dot(&colv[q], &colv[q]);
                let gamma = dot(&colv[p], &colv[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (u, v) = (colv[p][i], colv[q][i]);
                    colv[p][i] = c * u - s * v;
                    colv[q][i] = s * u + c * v;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = colv.iter().map(|c| norm(c)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `I - A X` with each entry accumulated by compensated (FMA) summation.
fn identity_residual(a: &Matrix, x: &Matrix) -> Matrix {
    let n = a.rows;
    let mut r = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (mut sum, mut comp) = (if i == j { -1.0 } else { 0.0 }, 0.0);
            for k in 0..n {
                let p = a[(i, k)] * x[(k, j)];
                let perr = a[(i, k)].mul_add(x[(k, j)], -p);
                let t = sum + p;
                let z = t - sum;
                comp += (sum - (t - z)) + (p - z) + perr;
                sum = t;
            }
            r.data[i * n + j] = -(sum + comp);
        }
    }
    r
}

/// Absolute tolerance `rel * lambda_max(m)`.
pub fn relative_tol(eig: &EigenDecomposition, rel: f64) -> f64 {
    rel * eig.max().max(0.0)
}

/// Largest singular value, `sqrt(lambda_max(M^T M))`.
///
/// The Gram matrix is formed on the smaller side.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.rows == 0 || m.cols == 0 {
        return 0.0;
    }
    let gram = if m.rows <= m.cols {
        m.matmul(&m.transpose())
    } else {
        m.transpose().matmul(m)
    }
    .expect("shapes agree by construction");
    let gram = SymMatrix::new(gram).expect("finite square gram matrix");
    match eigh(&gram) {
        Ok(eig) => eig.max().max(0.0).sqrt(),
        // Jacobi on a PSD Gram matrix of this size does not stall in practice;
        // fall back to the Frobenius bound rather than panic.
        Err(_) => m.frobenius_norm(),
    }
}

/// Singular value decomposition data needed by the rest of the crate: the
/// largest singular value and a matching unit right singular vector.
pub fn top_right_singular(m: &Matrix) -> (f64, Vec<f64>) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (0.0, vec![0.0; cols]);
    }
    let gram = SymMatrix::new(m.matmul(&m.transpose()).expect("shapes agree"))
        .expect("finite gram matrix");
    let eig = eigh(&gram).expect("jacobi on gram matrix");
    let sigma = eig.max().max(0.0).sqrt();
    if sigma == 0.0 {
        let mut v = vec![0.0; cols];
        v[0] = 1.0;
        return (0.0, v);
    }
    let u = eig.eigenvector(rows - 1);
    let mut v = m.transpose().mul_vec(&u).expect("shapes agree");
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    (sigma, v)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
