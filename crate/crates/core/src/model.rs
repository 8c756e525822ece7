//! The covariate-assisted directed beta-model.
//!
//! A directed graph on n nodes (no self-loops) has independent edges
//!
//! ```text
//! P(a_ij = 1) = exp(eta_ij) / (1 + exp(eta_ij)),
//! eta_ij      = Z_ij' gamma + alpha_i + beta_j,
//! ```
//!
//! with a length-p covariate vector `Z_ij` per ordered pair. `alpha_i` is the
//! out-edge strength of node i, `beta_j` the in-edge strength of node j, and
//! `gamma` the covariate (homophily) effect. The model is invariant under
//! `(alpha - c, beta + c)`, so `beta_n = 0` is imposed throughout; the free
//! degree parameter vector `theta = (alpha_1..alpha_n, beta_1..beta_{n-1})`
//! has length 2n-1.

use rand::Rng;
use thiserror::Error;

use crate::scalar::{count, real, Real};

/// Validation failures for graphs, covariates, and parameters.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("self-loop at node {node} is not allowed")]
    SelfLoop { node: usize },
    #[error("node index {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("need at least {min} nodes, got {n}")]
    TooFewNodes { n: usize, min: usize },
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("the last beta coordinate is the reference and must be 0, got {got}")]
    NonzeroReference { got: f64 },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
}

/// Dense directed graph with 0/1 adjacency and an empty diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    adj: Vec<u8>,
}

impl DirectedGraph {
    /// Creates an edgeless graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        DirectedGraph { n, adj: vec![0; n * n] }
    }

    /// Builds a graph from directed edges, collapsing duplicates.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        let mut g = DirectedGraph::empty(n);
        for &(i, j) in edges {
            g.check_pair(i, j)?;
            g.adj[i * n + j] = 1;
        }
        Ok(g)
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<(), ModelError> {
        if i >= self.n {
            return Err(ModelError::NodeOutOfRange { node: i, n: self.n });
        }
        if j >= self.n {
            return Err(ModelError::NodeOutOfRange { node: j, n: self.n });
        }
        if i == j {
            return Err(ModelError::SelfLoop { node: i });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j] != 0
    }

    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) -> Result<(), ModelError> {
        self.check_pair(i, j)?;
        self.adj[i * self.n + j] = u8::from(present);
        Ok(())
    }

    /// Out-degrees `d_i = sum_j a_ij`.
    pub fn out_degrees(&self) -> Vec<i64> {
        (0..self.n)
            .map(|i| self.adj[i * self.n..(i + 1) * self.n].iter().map(|&a| i64::from(a)).sum())
            .collect()
    }

    /// In-degrees `b_j = sum_i a_ij`.
    pub fn in_degrees(&self) -> Vec<i64> {
        let mut b = vec![0i64; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                b[j] += i64::from(self.adj[i * self.n + j]);
            }
        }
        b
    }

    /// The bi-degree sequence `(d, b)`.
    pub fn degree_sequences(&self) -> (Vec<i64>, Vec<i64>) {
        (self.out_degrees(), self.in_degrees())
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|&a| usize::from(a)).sum()
    }

    /// Directed edges in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for j in 0..self.n {
                if self.adj[i * self.n + j] != 0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The induced subgraph on `keep` (in the given order).
    pub fn subgraph(&self, keep: &[usize]) -> Result<DirectedGraph, ModelError> {
        for &v in keep {
            if v >= self.n {
                return Err(ModelError::NodeOutOfRange { node: v, n: self.n });
            }
        }
        let m = keep.len();
        let mut g = DirectedGraph::empty(m);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                if a != b && self.has_edge(i, j) {
                    g.adj[a * m + b] = 1;
                }
            }
        }
        Ok(g)
    }
}

/// Covariate vectors for every ordered pair, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariateSet<F> {
    n: usize,
    p: usize,
    z: Vec<F>,
}

impl<F: Real> CovariateSet<F> {
    /// All-zero covariates (reduces the model to the pure beta-model).
    pub fn zeros(n: usize, p: usize) -> Self {
        CovariateSet { n, p, z: vec![F::zero(); n * n * p] }
    }

    /// Fills `Z_ij = f(i, j)` for every ordered pair `i != j`.
    pub fn from_fn(n: usize, p: usize, mut f: impl FnMut(usize, usize) -> Vec<F>) -> Self {
        let mut covs = CovariateSet::zeros(n, p);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = f(i, j);
                assert_eq!(v.len(), p, "covariate dimension mismatch");
                covs.z[(i * n + j) * p..(i * n + j + 1) * p].copy_from_slice(&v);
            }
        }
        covs
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// The covariate vector of the ordered pair `(i, j)`.
    pub fn pair(&self, i: usize, j: usize) -> &[F] {
        &self.z[(i * self.n + j) * self.p..(i * self.n + j + 1) * self.p]
    }

    /// `q = max_{i != j} ||Z_ij||_inf`, the covariate magnitude bound.
    pub fn q_bound(&self) -> F {
        let mut q = F::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                for &z in self.pair(i, j) {
                    q = q.max(z.abs());
                }
            }
        }
        q
    }
}

/// Model parameters with the `beta_n = 0` reference baked in.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<F> {
    /// Out-edge strengths, length n.
    pub alpha: Vec<F>,
    /// In-edge strengths, length n; the last entry is always 0.
    pub beta: Vec<F>,
    /// Covariate effects, length p.
    pub gamma: Vec<F>,
}

impl<F: Real> ModelParams<F> {
    pub fn new(alpha: Vec<F>, beta: Vec<F>, gamma: Vec<F>) -> Result<Self, ModelError> {
        let n = alpha.len();
        if n < 2 {
            return Err(ModelError::TooFewNodes { n, min: 2 });
        }
        if beta.len() != n {
            return Err(ModelError::LengthMismatch { what: "beta entries", expected: n, got: beta.len() });
        }
        let last = beta[n - 1];
        if last != F::zero() {
            return Err(ModelError::NonzeroReference { got: last.to_f64().unwrap_or(f64::NAN) });
        }
        let all = alpha.iter().chain(&beta).chain(&gamma);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(ModelError::NonFinite { what: "parameters" });
        }
        Ok(ModelParams { alpha, beta, gamma })
    }

    /// All parameters zero.
    pub fn null(n: usize, p: usize) -> Self {
        ModelParams { alpha: vec![F::zero(); n], beta: vec![F::zero(); n], gamma: vec![F::zero(); p] }
    }

    /// Rebuilds from the free vector `theta = (alpha, beta_1..beta_{n-1})`.
    pub fn from_theta(theta: &[F], gamma: Vec<F>) -> Result<Self, ModelError> {
        if theta.len() % 2 == 0 {
            return Err(ModelError::LengthMismatch {
                what: "theta entries (must be 2n-1)",
                expected: theta.len() + 1,
                got: theta.len(),
            });
        }
        let n = (theta.len() + 1) / 2;
        let alpha = theta[..n].to_vec();
        let mut beta = theta[n..].to_vec();
        beta.push(F::zero());
        ModelParams::new(alpha, beta, gamma)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn p(&self) -> usize {
        self.gamma.len()
    }

    /// The free degree-parameter vector of length 2n-1.
    pub fn theta(&self) -> Vec<F> {
        let n = self.n();
        let mut theta = Vec::with_capacity(2 * n - 1);
        theta.extend_from_slice(&self.alpha);
        theta.extend_from_slice(&self.beta[..n - 1]);
        theta
    }

    /// Adds a step to the free vector in place, keeping `beta_n = 0`.
    pub fn step_theta(&mut self, delta: &[F]) {
        let n = self.n();
        assert_eq!(delta.len(), 2 * n - 1, "theta step dimension mismatch");
        for (a, d) in self.alpha.iter_mut().zip(&delta[..n]) {
            *a += *d;
        }
        for (b, d) in self.beta[..n - 1].iter_mut().zip(&delta[n..]) {
            *b += *d;
        }
    }
}

/// Bounds on the linear predictor and the edge variance, used as solver
/// diagnostics. `rho` bounds `|eta_ij|`; every `p_ij (1 - p_ij)` then lies in
/// `[m_lower, 1/4]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelBounds<F> {
    pub rho: F,
    pub m_lower: F,
    pub m_upper: F,
    pub m1_upper: F,
}

impl<F: Real> ModelBounds<F> {
    /// Evaluates the bounds at fixed parameters and covariates.
    pub fn at(params: &ModelParams<F>, covs: &CovariateSet<F>) -> Self {
        let n = params.n();
        let mut rho = F::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    rho = rho.max(linear_predictor(params, covs, i, j).abs());
                }
            }
        }
        let e = rho.exp();
        let m_lower = e / ((F::one() + e) * (F::one() + e));
        ModelBounds { rho, m_lower, m_upper: real(0.25), m1_upper: real(0.25) }
    }
}

/// `eta_ij = Z_ij' gamma + alpha_i + beta_j` without validity checks.
pub fn linear_predictor<F: Real>(
    params: &ModelParams<F>,
    covs: &CovariateSet<F>,
    i: usize,
    j: usize,
) -> F {
    let mut eta = params.alpha[i] + params.beta[j];
    for (&z, &g) in covs.pair(i, j).iter().zip(&params.gamma) {
        eta += z * g;
    }
    eta
}

/// Branch-stable logistic function, exact to saturation for large `|eta|`.
pub fn sigmoid<F: Real>(eta: F) -> F {
    if eta >= F::zero() {
        F::one() / (F::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (F::one() + e)
    }
}

/// Edge probability `P(a_ij = 1)` with index validation.
pub fn edge_prob<F: Real>(
    params: &ModelParams<F>,
    covs: &CovariateSet<F>,
    i: usize,
    j: usize,
) -> Result<F, ModelError> {
    let n = params.n();
    if i >= n {
        return Err(ModelError::NodeOutOfRange { node: i, n });
    }
    if j >= n {
        return Err(ModelError::NodeOutOfRange { node: j, n });
    }
    if i == j {
        return Err(ModelError::SelfLoop { node: i });
    }
    Ok(sigmoid(linear_predictor(params, covs, i, j)))
}

/// Expected out- and in-degree vectors `(sum_j p_ij, sum_i p_ij)`.
pub fn expected_degrees<F: Real>(
    params: &ModelParams<F>,
    covs: &CovariateSet<F>,
) -> (Vec<F>, Vec<F>) {
    let n = params.n();
    let mut d = vec![F::zero(); n];
    let mut b = vec![F::zero(); n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = sigmoid(linear_predictor(params, covs, i, j));
            d[i] += p;
            b[j] += p;
        }
    }
    (d, b)
}

/// Samples a graph with independent Bernoulli edges in row-major dyad order.
pub fn sample_graph<F: Real, R: Rng>(
    params: &ModelParams<F>,
    covs: &CovariateSet<F>,
    rng: &mut R,
) -> DirectedGraph {
    let n = params.n();
    let mut g = DirectedGraph::empty(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = sigmoid(linear_predictor(params, covs, i, j))
                .to_f64()
                .expect("probability must convert to f64");
            if rng.gen::<f64>() < p {
                g.adj[i * n + j] = 1;
            }
        }
    }
    g
}

/// Average edge variance weight `p(1-p)`; handy for calibration checks.
pub fn mean_edge_weight<F: Real>(params: &ModelParams<F>, covs: &CovariateSet<F>) -> F {
    let n = params.n();
    let mut acc = F::zero();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = sigmoid(linear_predictor(params, covs, i, j));
            acc += p * (F::one() - p);
        }
    }
    acc / count(n * (n - 1))
}
