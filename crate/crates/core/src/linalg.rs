//! Dense linear algebra for small systems.
//!
//! The estimating-equation solver factorizes matrices of order 2n-1 (a few
//! hundred at desk scale) and the p x p covariate information matrix. A
//! compact row-major matrix with LU partial pivoting and a Cholesky routine
//! covers every use in this crate; nothing here is tuned beyond what those
//! sizes need.

use thiserror::Error;

use crate::scalar::{real, Real};

/// Failure modes of the dense factorizations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    /// A pivot collapsed below the numerical rank threshold.
    #[error("matrix is singular (pivot {pivot} too small)")]
    Singular { pivot: usize },
    /// A leading minor of a supposedly SPD matrix was not positive.
    #[error("matrix is not positive definite (leading minor {index})")]
    NotPositiveDefinite { index: usize },
    /// Operand shapes do not line up.
    #[error("dimension mismatch: {context}")]
    ShapeMismatch { context: &'static str },
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Real> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::ShapeMismatch { context: "ragged row lengths" });
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix<F> {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == F::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Largest absolute entry (the max-norm used for approximation-error
    /// measurements).
    pub fn max_abs_entry(&self) -> F {
        self.data.iter().fold(F::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Operator infinity norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> F {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum())
            .fold(F::zero(), F::max)
    }
}

impl<F: Real> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F: Real> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct LuFactor<F> {
    lu: Matrix<F>,
    piv: Vec<usize>,
}

impl<F: Real> LuFactor<F> {
    /// Factorizes a square matrix, consuming it as workspace.
    pub fn new(mut a: Matrix<F>) -> Result<Self, LinalgError> {
        let n = a.rows();
        if n != a.cols() {
            return Err(LinalgError::ShapeMismatch { context: "LU of a non-square matrix" });
        }
        let scale = a.max_abs_entry();
        let tiny = scale.max(F::one()) * F::epsilon() * real(32.0);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            for i in (k + 1)..n {
                let cand = a[(i, k)].abs();
                if cand > best {
                    best = cand;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(LinalgError::Singular { pivot: k });
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
            }
            let pivot = a[(k, k)];
            for i in (k + 1)..n {
                let m = a[(i, k)] / pivot;
                a[(i, k)] = m;
                if m == F::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let sub = m * a[(k, j)];
                    a[(i, j)] -= sub;
                }
            }
        }
        Ok(LuFactor { lu: a, piv })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A x = b` for a single right-hand side.
    pub fn solve_vec(&self, b: &[F]) -> Vec<F> {
        assert_eq!(b.len(), self.dim(), "solve dimension mismatch");
        let n = self.dim();
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            for i in (k + 1)..n {
                let sub = self.lu[(i, k)] * x[k];
                x[i] -= sub;
            }
        }
        for k in (0..n).rev() {
            for j in (k + 1)..n {
                let sub = self.lu[(k, j)] * x[j];
                x[k] -= sub;
            }
            x[k] /= self.lu[(k, k)];
        }
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve_mat(&self, b: &Matrix<F>) -> Matrix<F> {
        assert_eq!(b.rows(), self.dim(), "solve dimension mismatch");
        let mut out = Matrix::zeros(b.rows(), b.cols());
        let mut col = vec![F::zero(); b.rows()];
        for j in 0..b.cols() {
            for i in 0..b.rows() {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..b.rows() {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> Matrix<F> {
        self.solve_mat(&Matrix::identity(self.dim()))
    }
}

/// Cholesky factorization of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<F> {
    l: Matrix<F>,
}

impl<F: Real> Cholesky<F> {
    pub fn new(a: &Matrix<F>) -> Result<Self, LinalgError> {
        let n = a.rows();
        if n != a.cols() {
            return Err(LinalgError::ShapeMismatch { context: "Cholesky of a non-square matrix" });
        }
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for k in 0..j {
                    let sub = l[(i, k)] * l[(j, k)];
                    s -= sub;
                }
                if i == j {
                    if s <= F::zero() {
                        return Err(LinalgError::NotPositiveDefinite { index: i });
                    }
                    l[(i, j)] = s.sqrt();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Smallest squared pivot, the tightest definiteness witness the
    /// factorization offers.
    pub fn min_pivot_sq(&self) -> F {
        let mut min = self.l[(0, 0)] * self.l[(0, 0)];
        for j in 1..self.dim() {
            let v = self.l[(j, j)] * self.l[(j, j)];
            if v < min {
                min = v;
            }
        }
        min
    }

    pub fn solve_vec(&self, b: &[F]) -> Vec<F> {
        assert_eq!(b.len(), self.dim(), "solve dimension mismatch");
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let sub = self.l[(i, k)] * y[k];
                y[i] -= sub;
            }
            y[i] /= self.l[(i, i)];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let sub = self.l[(k, i)] * y[k];
                y[i] -= sub;
            }
            y[i] /= self.l[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> Matrix<F> {
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        let mut e = vec![F::zero(); n];
        for j in 0..n {
            e[j] = F::one();
            let x = self.solve_vec(&e);
            e[j] = F::zero();
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

/// Maximum absolute entry of a vector.
pub fn inf_norm<F: Real>(v: &[F]) -> F {
    v.iter().fold(F::zero(), |acc, &x| acc.max(x.abs()))
}
