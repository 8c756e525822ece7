//! Moment estimating equations, their structured Jacobian, and the Schur
//! complement for the covariate effect.
//!
//! Given released degree targets `(d~, b~)` and covariates, the system stacks
//! 2n-1 degree equations (the in-degree equation of the reference node n is
//! dropped alongside its fixed `beta_n = 0`) and p covariate equations:
//!
//! ```text
//! F_i     = d~_i - sum_{j != i} p_ij              i = 1..n
//! F_{n+j} = b~_j - sum_{i != j} p_ij              j = 1..n-1
//! Q_k     = sum_{i != j} Z_ijk (a_ij - p_ij)      k = 1..p
//! ```
//!
//! The Jacobian of the degree block with respect to `theta` is highly
//! structured: writing `w_ij = p_ij (1 - p_ij)`, it has diagonal alpha/beta
//! blocks and the dense cross block `w`. Its inverse admits the closed-form
//! approximation
//!
//! ```text
//! S = diag(1 / v_ii) + u u' / v_2n2n,   u = (1_n, -1_{n-1}),
//! ```
//!
//! where `v_2n2n` is the bookkeeping diagonal entry of the dropped
//! reference coordinate; the approximation error decays like 1/n^2 uniformly
//! in the entries. Profiling out `theta` leaves the p x p Schur complement
//! `H = G_gg - G_gt V^{-1} G_tg`, the effective information for `gamma`.

use thiserror::Error;

use crate::dp::DegreeRelease;
use crate::linalg::{Cholesky, LinalgError, LuFactor, Matrix};
use crate::model::{linear_predictor, sigmoid, CovariateSet, DirectedGraph, ModelError, ModelParams};
use crate::scalar::{count, real, Real};

/// Failures when assembling or factorizing the moment system.
#[derive(Debug, Error, PartialEq)]
pub enum MomentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("covariate information matrix is degenerate: {reason}")]
    Degenerate { reason: &'static str },
}

/// The estimating-equation system for one data set.
#[derive(Clone, Debug)]
pub struct MomentSystem<F> {
    graph: DirectedGraph,
    covs: CovariateSet<F>,
    d_target: Vec<F>,
    b_target: Vec<F>,
}

impl<F: Real> MomentSystem<F> {
    /// Builds the system from a released bi-degree sequence.
    pub fn new(
        graph: DirectedGraph,
        covs: CovariateSet<F>,
        release: &DegreeRelease,
    ) -> Result<Self, ModelError> {
        let d = release.d_tilde.iter().map(|&x| real(x as f64)).collect();
        let b = release.b_tilde.iter().map(|&x| real(x as f64)).collect();
        Self::with_float_targets(graph, covs, d, b)
    }

    /// Builds the system from arbitrary real-valued degree targets. Used by
    /// calibration and tests; the noisy-release constructor reduces to this.
    pub fn with_float_targets(
        graph: DirectedGraph,
        covs: CovariateSet<F>,
        d_target: Vec<F>,
        b_target: Vec<F>,
    ) -> Result<Self, ModelError> {
        let n = graph.n();
        if n < 3 {
            return Err(ModelError::TooFewNodes { n, min: 3 });
        }
        if covs.n() != n {
            return Err(ModelError::LengthMismatch { what: "covariate nodes", expected: n, got: covs.n() });
        }
        if d_target.len() != n {
            return Err(ModelError::LengthMismatch { what: "out-degree targets", expected: n, got: d_target.len() });
        }
        if b_target.len() != n {
            return Err(ModelError::LengthMismatch { what: "in-degree targets", expected: n, got: b_target.len() });
        }
        Ok(MomentSystem { graph, covs, d_target, b_target })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn p(&self) -> usize {
        self.covs.p()
    }

    /// Number of degree equations, 2n-1.
    pub fn dim(&self) -> usize {
        2 * self.n() - 1
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn covs(&self) -> &CovariateSet<F> {
        &self.covs
    }

    pub fn d_target(&self) -> &[F] {
        &self.d_target
    }

    /// In-degree targets; the last entry belongs to the dropped equation.
    pub fn b_target(&self) -> &[F] {
        &self.b_target
    }

    /// Edge probability matrix at `params` (zero diagonal).
    pub fn probs(&self, params: &ModelParams<F>) -> Matrix<F> {
        let n = self.n();
        let mut probs = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    probs[(i, j)] = sigmoid(linear_predictor(params, &self.covs, i, j));
                }
            }
        }
        probs
    }

    /// Degree residuals `F(theta, gamma)` of length 2n-1.
    pub fn eval_f(&self, params: &ModelParams<F>) -> Vec<F> {
        self.eval_f_cached(&self.probs(params))
    }

    /// As [`eval_f`](Self::eval_f) with precomputed probabilities.
    pub fn eval_f_cached(&self, probs: &Matrix<F>) -> Vec<F> {
        let n = self.n();
        let mut f = vec![F::zero(); 2 * n - 1];
        for i in 0..n {
            let mut expected = F::zero();
            for j in 0..n {
                expected += probs[(i, j)];
            }
            f[i] = self.d_target[i] - expected;
        }
        for j in 0..n - 1 {
            let mut expected = F::zero();
            for i in 0..n {
                expected += probs[(i, j)];
            }
            f[n + j] = self.b_target[j] - expected;
        }
        f
    }

    /// Covariate residuals `Q(theta, gamma)` of length p, using the raw
    /// adjacency (the degree release plays no role here).
    pub fn eval_q(&self, params: &ModelParams<F>) -> Vec<F> {
        self.eval_q_cached(&self.probs(params))
    }

    /// As [`eval_q`](Self::eval_q) with precomputed probabilities.
    pub fn eval_q_cached(&self, probs: &Matrix<F>) -> Vec<F> {
        let n = self.n();
        let p = self.p();
        let mut q = vec![F::zero(); p];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let resid = if self.graph.has_edge(i, j) { F::one() } else { F::zero() } - probs[(i, j)];
                for (qk, &z) in q.iter_mut().zip(self.covs.pair(i, j)) {
                    *qk += z * resid;
                }
            }
        }
        q
    }

    /// Structured Jacobian of the degree block (positive sign convention:
    /// the matrix of `-dF/dtheta`, whose entries are the `w_ij` weights).
    pub fn jacobian(&self, params: &ModelParams<F>) -> StructuredJacobian<F> {
        self.jacobian_cached(&self.probs(params))
    }

    /// As [`jacobian`](Self::jacobian) with precomputed probabilities.
    pub fn jacobian_cached(&self, probs: &Matrix<F>) -> StructuredJacobian<F> {
        let n = self.n();
        let mut w = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let p = probs[(i, j)];
                    w[(i, j)] = p * (F::one() - p);
                }
            }
        }
        let mut diag = vec![F::zero(); 2 * n - 1];
        for i in 0..n {
            let mut s = F::zero();
            for j in 0..n {
                s += w[(i, j)];
            }
            diag[i] = s;
        }
        for j in 0..n - 1 {
            let mut s = F::zero();
            for i in 0..n {
                s += w[(i, j)];
            }
            diag[n + j] = s;
        }
        let mut v2n2n = F::zero();
        for i in 0..n {
            v2n2n += w[(i, n - 1)];
        }
        StructuredJacobian { n, diag, w, v2n2n }
    }

    /// Cross block `G_tg = -dF/dgamma`, a (2n-1) x p matrix: row i holds
    /// `sum_{j != i} w_ij Z_ij`, row n+j holds `sum_{i != j} w_ij Z_ij`.
    pub fn cross_block(&self, probs: &Matrix<F>) -> Matrix<F> {
        let n = self.n();
        let p = self.p();
        let mut g = Matrix::zeros(2 * n - 1, p);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pij = probs[(i, j)];
                let wij = pij * (F::one() - pij);
                let z = self.covs.pair(i, j);
                for k in 0..p {
                    g[(i, k)] += wij * z[k];
                    if j < n - 1 {
                        g[(n + j, k)] += wij * z[k];
                    }
                }
            }
        }
        g
    }

    /// Covariate information `G_gg = -dQ/dgamma = sum w_ij Z_ij Z_ij'`.
    pub fn gamma_information(&self, probs: &Matrix<F>) -> Matrix<F> {
        let n = self.n();
        let p = self.p();
        let mut g = Matrix::zeros(p, p);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pij = probs[(i, j)];
                let wij = pij * (F::one() - pij);
                let z = self.covs.pair(i, j);
                for a in 0..p {
                    for b in 0..p {
                        g[(a, b)] += wij * z[a] * z[b];
                    }
                }
            }
        }
        g
    }

    /// Schur complement `H = G_gg - G_gt V^{-1} G_tg` with an exact linear
    /// solve for the inner inverse, verified symmetric positive definite.
    pub fn schur(
        &self,
        jac: &StructuredJacobian<F>,
        probs: &Matrix<F>,
    ) -> Result<SchurMatrix<F>, MomentError> {
        let n = self.n();
        let cross = self.cross_block(probs);
        let lu = LuFactor::new(jac.to_dense())?;
        let x = lu.solve_mat(&cross);
        let mut h = self.gamma_information(probs);
        let p = self.p();
        for a in 0..p {
            for b in 0..p {
                let mut s = F::zero();
                for r in 0..2 * n - 1 {
                    s += cross[(r, a)] * x[(r, b)];
                }
                h[(a, b)] -= s;
            }
        }
        // Roundoff symmetrization; the Schur complement is symmetric exactly.
        for a in 0..p {
            for b in 0..a {
                let avg = (h[(a, b)] + h[(b, a)]) / real(2.0);
                h[(a, b)] = avg;
                h[(b, a)] = avg;
            }
        }
        let chol = Cholesky::new(&h).map_err(|_| MomentError::Degenerate {
            reason: "Schur complement not positive definite",
        })?;
        let mut max_diag = F::zero();
        for a in 0..p {
            if h[(a, a)] > max_diag {
                max_diag = h[(a, a)];
            }
        }
        if chol.min_pivot_sq() <= max_diag * F::epsilon().sqrt() {
            return Err(MomentError::Degenerate {
                reason: "a covariate carries no information beyond the degree parameters",
            });
        }
        Ok(SchurMatrix { h, n_pairs: n * (n - 1) })
    }
}

/// The (2n-1) x (2n-1) degree-block Jacobian in structured form: two
/// diagonal blocks, the dense nonnegative cross block `w` (zero diagonal),
/// and the bookkeeping entry of the dropped reference coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredJacobian<F> {
    n: usize,
    /// `v_ii` for the 2n-1 retained coordinates.
    pub diag: Vec<F>,
    /// `w_ij = p_ij (1 - p_ij)` with a zero diagonal.
    pub w: Matrix<F>,
    /// `v_2n2n = sum_{i != n} w_in`, the reference coordinate's diagonal.
    pub v2n2n: F,
}

impl<F: Real> StructuredJacobian<F> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n - 1
    }

    /// Smallest and largest off-diagonal weights (the class bounds m, M).
    pub fn weight_bounds(&self) -> (F, F) {
        let n = self.n;
        let mut lo = F::infinity();
        let mut hi = F::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    lo = lo.min(self.w[(i, j)]);
                    hi = hi.max(self.w[(i, j)]);
                }
            }
        }
        (lo, hi)
    }

    /// Materializes the dense matrix (for factorization and tests).
    pub fn to_dense(&self) -> Matrix<F> {
        let n = self.n;
        let dim = self.dim();
        let mut v = Matrix::zeros(dim, dim);
        for k in 0..dim {
            v[(k, k)] = self.diag[k];
        }
        for i in 0..n {
            for j in 0..n - 1 {
                if i != j {
                    v[(i, n + j)] = self.w[(i, j)];
                    v[(n + j, i)] = self.w[(i, j)];
                }
            }
        }
        v
    }

    /// Exact LU factorization of the dense form.
    pub fn factorize(&self) -> Result<LuFactor<F>, LinalgError> {
        LuFactor::new(self.to_dense())
    }

    /// Applies the closed-form approximate inverse:
    /// `(S b)_k = b_k / v_kk + u_k (u' b) / v_2n2n`.
    pub fn apply_approx_inverse(&self, b: &[F]) -> Vec<F> {
        assert_eq!(b.len(), self.dim(), "approximate inverse dimension mismatch");
        let n = self.n;
        let mut signed = F::zero();
        for (k, &x) in b.iter().enumerate() {
            if k < n {
                signed += x;
            } else {
                signed -= x;
            }
        }
        let t = signed / self.v2n2n;
        b.iter()
            .enumerate()
            .map(|(k, &x)| {
                let u = if k < n { F::one() } else { -F::one() };
                x / self.diag[k] + u * t
            })
            .collect()
    }

    /// Dense form of the approximate inverse (tests and variance plug-ins).
    pub fn approx_inverse_dense(&self) -> Matrix<F> {
        let dim = self.dim();
        let n = self.n;
        let mut s = Matrix::zeros(dim, dim);
        for i in 0..dim {
            let ui = if i < n { F::one() } else { -F::one() };
            for j in 0..dim {
                let uj = if j < n { F::one() } else { -F::one() };
                let mut val = ui * uj / self.v2n2n;
                if i == j {
                    val += self.diag[i].recip();
                }
                s[(i, j)] = val;
            }
        }
        s
    }
}

/// The profiled information for `gamma` and the pair count it aggregates.
#[derive(Clone, Debug)]
pub struct SchurMatrix<F> {
    /// Positive-definite p x p Schur complement.
    pub h: Matrix<F>,
    /// `N = n (n - 1)`, the number of ordered pairs.
    pub n_pairs: usize,
}

impl<F: Real> SchurMatrix<F> {
    pub fn p(&self) -> usize {
        self.h.rows()
    }

    pub fn cholesky(&self) -> Result<Cholesky<F>, LinalgError> {
        Cholesky::new(&self.h)
    }

    /// Conditioning diagnostic `n^2 ||H^{-1}||_inf`; bounded in n when the
    /// n^2-normalized information converges.
    pub fn lambda_diag(&self, n: usize) -> Result<F, LinalgError> {
        if self.p() == 0 {
            return Ok(F::zero());
        }
        let inv = self.cholesky()?.inverse();
        Ok(count::<F>(n * n) * inv.inf_norm())
    }
}
