//! Two-level Newton solver for the profiled moment equations.
//!
//! The inner loop solves the 2n-1 degree equations for `theta` at fixed
//! `gamma` via `theta <- theta + V^{-1} F`; the outer loop updates the
//! covariate effect via `gamma <- gamma + H^{-1} Q` with the Schur
//! complement `H` of the profiled system. Both levels run undamped by
//! default, with one damped retry when the plain iteration fails. The
//! fitted point solves `F = 0` and `Q = 0` jointly.
//!
//! A solution need not exist: noisy degree targets can leave the feasible
//! polytope, in which case the fixed point is at infinity. That outcome is
//! data, not an error, and is reported through [`FitResult::exists`] with a
//! machine-readable [`NonexistenceReason`]. Targets outside the open
//! interval (0, n-1) are rejected before iterating; the remaining cases are
//! caught by the divergence bound and the iteration caps.

use thiserror::Error;

use crate::linalg::inf_norm;
use crate::model::ModelParams;
use crate::moment::{MomentError, MomentSystem};
use crate::scalar::{count, real, Real};

/// Tolerances and iteration limits for [`fit`].
#[derive(Clone, Debug)]
pub struct SolverConfig<F> {
    /// Convergence threshold on the max-norm of the degree residuals.
    pub tol_theta: F,
    /// Convergence threshold on the max-norm of the covariate residuals.
    pub tol_gamma: F,
    /// Inner Newton iteration cap per outer step.
    pub max_inner: usize,
    /// Outer Newton iteration cap.
    pub max_outer: usize,
    /// Declare nonexistence once the max-norm of `theta` exceeds this.
    pub divergence_bound: F,
    /// Use the closed-form approximate inverse for inner steps instead of
    /// an exact factorization. Cheaper per step, more steps.
    pub fast_inner: bool,
    /// Halve steps that increase the degree residual from the first
    /// iteration on. Off by default; [`fit`] still falls back to one damped
    /// pass when the plain iteration fails.
    pub backtracking: bool,
}

impl<F: Real> Default for SolverConfig<F> {
    fn default() -> Self {
        SolverConfig {
            tol_theta: real(1e-8),
            tol_gamma: real(1e-8),
            max_inner: 200,
            max_outer: 100,
            divergence_bound: real(1e6),
            fast_inner: false,
            backtracking: false,
        }
    }
}

/// Why the fit declared that no solution exists.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum NonexistenceReason {
    #[error("{side}-degree target {value} of node {index} lies outside the open interval (0, {limit})")]
    TargetOutOfRange { side: &'static str, index: usize, value: f64, limit: f64 },
    #[error("parameters diverged: max |theta| reached {max_abs:.3e} after {inner_iters} inner iterations")]
    Diverged { max_abs: f64, inner_iters: usize },
    #[error("inner iteration limit {limit} reached without convergence")]
    InnerIterationLimit { limit: usize },
    #[error("outer iteration limit {limit} reached without convergence")]
    OuterIterationLimit { limit: usize },
    #[error("degree-block Jacobian became singular at inner iteration {inner_iters}")]
    SingularJacobian { inner_iters: usize },
    #[error("line search stalled at inner iteration {inner_iters} with residual {residual:.3e}")]
    StalledLineSearch { inner_iters: usize, residual: f64 },
    #[error("released degree totals are inconsistent: sum(d) - sum(b_1..b_{{n-1}}) = {total} lies outside the open interval (0, {limit})")]
    AggregateInfeasible { total: f64, limit: f64 },
}

/// Outcome of a full fit. When `exists` is false, `params` holds the last
/// iterate for diagnostics only.
#[derive(Clone, Debug)]
pub struct FitResult<F> {
    pub exists: bool,
    pub params: ModelParams<F>,
    pub reason: Option<NonexistenceReason>,
    /// Inner Newton iterations summed over all outer steps.
    pub inner_iters: usize,
    pub outer_iters: usize,
    /// Final max-norm of the degree residuals.
    pub residual_f: F,
    /// Final max-norm of the covariate residuals.
    pub residual_q: F,
}

impl<F: Real> FitResult<F> {
    fn nonexistent(params: ModelParams<F>, reason: NonexistenceReason, inner: usize, outer: usize) -> Self {
        FitResult {
            exists: false,
            params,
            reason: Some(reason),
            inner_iters: inner,
            outer_iters: outer,
            residual_f: F::nan(),
            residual_q: F::nan(),
        }
    }
}

/// Checks necessary conditions on the targets: every active degree target
/// must lie strictly inside (0, n-1), and so must the implied edge total of
/// the reference node's in-column. The latter follows from summing the
/// moment equations: any root satisfies
/// `sum(d) - sum(b_1..b_{n-1}) = sum_i p_in`, a sum of n-1 probabilities.
/// The in-degree target of the reference node has no equation and is
/// exempt. Noise on the released degrees can violate either condition, in
/// which case no finite root exists.
pub fn infeasible_target<F: Real>(sys: &MomentSystem<F>) -> Option<NonexistenceReason> {
    let n = sys.n();
    let limit = count::<F>(n - 1);
    let bad = |side: &'static str, index: usize, value: F| NonexistenceReason::TargetOutOfRange {
        side,
        index,
        value: value.to_f64().unwrap_or(f64::NAN),
        limit: (n - 1) as f64,
    };
    for (i, &d) in sys.d_target().iter().enumerate() {
        if !(d > F::zero() && d < limit) {
            return Some(bad("out", i, d));
        }
    }
    for (j, &b) in sys.b_target().iter().take(n - 1).enumerate() {
        if !(b > F::zero() && b < limit) {
            return Some(bad("in", j, b));
        }
    }
    let total = sys.d_target().iter().fold(F::zero(), |acc, &d| acc + d)
        - sys.b_target().iter().take(n - 1).fold(F::zero(), |acc, &b| acc + b);
    if !(total > F::zero() && total < limit) {
        return Some(NonexistenceReason::AggregateInfeasible {
            total: total.to_f64().unwrap_or(f64::NAN),
            limit: (n - 1) as f64,
        });
    }
    None
}

/// Starting point: element-wise logits of the clamped degree targets and a
/// zero covariate effect.
pub fn initial_params<F: Real>(sys: &MomentSystem<F>) -> ModelParams<F> {
    let n = sys.n();
    let cap = count::<F>(n - 1);
    let logit = |target: F| {
        let c = target.max(real(0.5)).min(cap - real(0.5));
        (c / (cap - c)).ln()
    };
    let alpha: Vec<F> = sys.d_target().iter().map(|&d| logit(d)).collect();
    let mut beta: Vec<F> = sys.b_target().iter().map(|&b| logit(b)).collect();
    beta[n - 1] = F::zero();
    ModelParams::new(alpha, beta, vec![F::zero(); sys.p()]).expect("valid start")
}

/// Report from one inner solve.
#[derive(Clone, Copy, Debug)]
pub struct InnerSolve<F> {
    pub iters: usize,
    pub residual_f: F,
}

/// Newton iteration on the degree equations at fixed `gamma`, updating
/// `params` in place. Leaves `params` at the last iterate on failure.
pub fn solve_theta<F: Real>(
    sys: &MomentSystem<F>,
    params: &mut ModelParams<F>,
    cfg: &SolverConfig<F>,
) -> Result<InnerSolve<F>, NonexistenceReason> {
    let mut norm_f = F::infinity();
    for it in 0..=cfg.max_inner {
        let probs = sys.probs(params);
        let f = sys.eval_f_cached(&probs);
        norm_f = inf_norm(&f);
        if norm_f <= cfg.tol_theta {
            return Ok(InnerSolve { iters: it, residual_f: norm_f });
        }
        if it == cfg.max_inner {
            break;
        }
        let jac = sys.jacobian_cached(&probs);
        let delta = if cfg.fast_inner {
            jac.apply_approx_inverse(&f)
        } else {
            let lu = jac
                .factorize()
                .map_err(|_| NonexistenceReason::SingularJacobian { inner_iters: it })?;
            lu.solve_vec(&f)
        };
        // The approximate-inverse path has a smaller basin of attraction
        // than exact Newton, so it always runs with monotone step control;
        // the exact path stays undamped unless asked otherwise. The merit
        // is the squared residual: Newton directions descend it, so some
        // step fraction must pass the sufficient-decrease test, and 31
        // failed halvings mean the direction is numerically useless.
        if cfg.backtracking || cfg.fast_inner {
            let sum_sq = |v: &[F]| v.iter().fold(F::zero(), |acc, &x| acc + x * x);
            let base = sum_sq(&f);
            let mut scale = F::one();
            let mut accepted = None;
            for _ in 0..31 {
                let scaled: Vec<F> = delta.iter().map(|&d| d * scale).collect();
                let mut trial = params.clone();
                trial.step_theta(&scaled);
                let m = sum_sq(&sys.eval_f(&trial));
                if m.is_finite() && m <= base * (F::one() - real::<F>(1e-4) * scale) {
                    accepted = Some(trial);
                    break;
                }
                scale /= real(2.0);
            }
            match accepted {
                Some(t) => *params = t,
                None => {
                    return Err(NonexistenceReason::StalledLineSearch {
                        inner_iters: it,
                        residual: norm_f.to_f64().unwrap_or(f64::NAN),
                    })
                }
            }
        } else {
            params.step_theta(&delta);
        }
        let theta_norm = params
            .theta()
            .iter()
            .fold(F::zero(), |acc, &x| acc.max(x.abs()));
        if theta_norm > cfg.divergence_bound {
            return Err(NonexistenceReason::Diverged {
                max_abs: theta_norm.to_f64().unwrap_or(f64::NAN),
                inner_iters: it + 1,
            });
        }
        if !theta_norm.is_finite() {
            return Err(NonexistenceReason::Diverged { max_abs: f64::NAN, inner_iters: it + 1 });
        }
    }
    let _ = norm_f;
    Err(NonexistenceReason::InnerIterationLimit { limit: cfg.max_inner })
}

/// Fits the model by profiled Newton iteration. Nonexistence is reported in
/// the result; only degeneracy of the covariate information is an error.
///
/// The undamped iteration can overshoot into a saturated region on
/// instances that do have a solution, so a failed pass without
/// [`SolverConfig::backtracking`] is retried once with step halving before
/// nonexistence is declared. Out-of-range targets are never retried.
pub fn fit<F: Real>(
    sys: &MomentSystem<F>,
    cfg: &SolverConfig<F>,
) -> Result<FitResult<F>, MomentError> {
    let first = fit_once(sys, cfg)?;
    let retry = !first.exists
        && !cfg.backtracking
        && !matches!(
            first.reason,
            Some(
                NonexistenceReason::TargetOutOfRange { .. }
                    | NonexistenceReason::AggregateInfeasible { .. }
            )
        );
    if !retry {
        return Ok(first);
    }
    let damped = SolverConfig { backtracking: true, ..cfg.clone() };
    fit_once(sys, &damped)
}

fn fit_once<F: Real>(
    sys: &MomentSystem<F>,
    cfg: &SolverConfig<F>,
) -> Result<FitResult<F>, MomentError> {
    let mut params = initial_params(sys);
    if let Some(reason) = infeasible_target(sys) {
        return Ok(FitResult::nonexistent(params, reason, 0, 0));
    }
    let mut inner_total = 0;
    for outer in 0.. {
        match solve_theta(sys, &mut params, cfg) {
            Ok(report) => inner_total += report.iters,
            Err(reason) => return Ok(FitResult::nonexistent(params, reason, inner_total, outer)),
        }
        let probs = sys.probs(&params);
        let q = sys.eval_q_cached(&probs);
        let residual_q = inf_norm(&q);
        if residual_q <= cfg.tol_gamma {
            let residual_f = inf_norm(&sys.eval_f_cached(&probs));
            return Ok(FitResult {
                exists: true,
                params,
                reason: None,
                inner_iters: inner_total,
                outer_iters: outer,
                residual_f,
                residual_q,
            });
        }
        if outer == cfg.max_outer {
            return Ok(FitResult::nonexistent(
                params,
                NonexistenceReason::OuterIterationLimit { limit: cfg.max_outer },
                inner_total,
                outer,
            ));
        }
        let jac = sys.jacobian_cached(&probs);
        // A singular degree block here means the inner solve met its
        // tolerance on a saturation plateau, the same situation the inner
        // loop reports as nonexistence.
        let schur = match sys.schur(&jac, &probs) {
            Ok(s) => s,
            Err(MomentError::Linalg(_)) => {
                return Ok(FitResult::nonexistent(
                    params,
                    NonexistenceReason::SingularJacobian { inner_iters: inner_total },
                    inner_total,
                    outer,
                ));
            }
            Err(e) => return Err(e),
        };
        let step = schur
            .cholesky()
            .map_err(|_| MomentError::Degenerate { reason: "Schur complement not positive definite" })?
            .solve_vec(&q);
        for (g, s) in params.gamma.iter_mut().zip(&step) {
            *g += *s;
        }
    }
    unreachable!("outer loop exits via return");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{AlphaFormula, PrivacyBudget};
    use crate::linalg::{LuFactor, Matrix};
    use crate::model::{expected_degrees, sample_graph, CovariateSet, DirectedGraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simulated_system(n: usize, seed: u64) -> (MomentSystem<f64>, ModelParams<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha: Vec<f64> = (0..n).map(|i| 0.4 - 0.8 * (i as f64) / (n as f64)).collect();
        let mut beta = alpha.clone();
        beta[n - 1] = 0.0;
        let params = ModelParams::new(alpha, beta, vec![0.8, -0.5]).unwrap();
        let covs = CovariateSet::from_fn(n, 2, |i, j| {
            vec![
                if (i * 7 + j * 3) % 5 < 2 { 1.0 } else { -1.0 },
                ((i % 4) as f64 - (j % 4) as f64).abs() / 4.0,
            ]
        });
        let graph = sample_graph(&params, &covs, &mut rng);
        let (d, b) = graph.degree_sequences();
        let budget = PrivacyBudget::<f64>::Infinite;
        let release = crate::dp::release_from_degrees(&d, &b, budget, AlphaFormula::EpsilonOverTwo, 7, &mut rng);
        let sys = MomentSystem::new(graph, covs, &release).unwrap();
        (sys, params)
    }

    #[test]
    fn noise_free_fit_reproduces_the_degree_sequence() {
        let (sys, _) = simulated_system(40, 11);
        let cfg = SolverConfig::default();
        let fit = fit(&sys, &cfg).unwrap();
        assert!(fit.exists, "{:?}", fit.reason);
        assert!(fit.residual_f < 1e-8 && fit.residual_q < 1e-8);
        let (d_hat, b_hat) = expected_degrees(&fit.params, sys.covs());
        for i in 0..sys.n() {
            assert!((d_hat[i] - sys.d_target()[i]).abs() < 1e-7);
        }
        for j in 0..sys.n() - 1 {
            assert!((b_hat[j] - sys.b_target()[j]).abs() < 1e-7);
        }
        assert_eq!(fit.params.beta[sys.n() - 1], 0.0);
    }

    #[test]
    fn profiled_and_joint_newton_find_the_same_root() {
        let (sys, _) = simulated_system(8, 3);
        let cfg = SolverConfig::default();
        let mine = fit(&sys, &cfg).unwrap();
        assert!(mine.exists);

        // Independent route: joint Newton on the stacked equations with a
        // finite-difference Jacobian.
        let n = sys.n();
        let p = sys.p();
        let dim = 2 * n - 1 + p;
        let unpack = |x: &[f64]| {
            let alpha = x[..n].to_vec();
            let mut beta = x[n..2 * n - 1].to_vec();
            beta.push(0.0);
            let gamma = x[2 * n - 1..].to_vec();
            ModelParams::new(alpha, beta, gamma).unwrap()
        };
        let stacked = |x: &[f64]| {
            let prm = unpack(x);
            let mut out = sys.eval_f(&prm);
            out.extend(sys.eval_q(&prm));
            out
        };
        let mut x = vec![0.0; dim];
        let start = initial_params(&sys);
        x[..n].copy_from_slice(&start.alpha);
        x[n..2 * n - 1].copy_from_slice(&start.beta[..n - 1]);
        for _ in 0..60 {
            let f = stacked(&x);
            if inf_norm(&f) < 1e-11 {
                break;
            }
            let h = 1e-6;
            let mut jac = Matrix::zeros(dim, dim);
            for k in 0..dim {
                let mut up = x.clone();
                up[k] += h;
                let mut dn = x.clone();
                dn[k] -= h;
                let fu = stacked(&up);
                let fd = stacked(&dn);
                for r in 0..dim {
                    jac[(r, k)] = (fu[r] - fd[r]) / (2.0 * h);
                }
            }
            let step = LuFactor::new(jac).unwrap().solve_vec(&f);
            for k in 0..dim {
                x[k] -= step[k];
            }
        }
        let joint = unpack(&x);
        assert!(inf_norm(&stacked(&x)) < 1e-9, "joint Newton failed to converge");
        for i in 0..n {
            assert!((joint.alpha[i] - mine.params.alpha[i]).abs() < 1e-6);
            assert!((joint.beta[i] - mine.params.beta[i]).abs() < 1e-6);
        }
        for k in 0..p {
            assert!((joint.gamma[k] - mine.params.gamma[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn relabeling_nodes_permutes_the_estimates() {
        let (sys, _) = simulated_system(12, 21);
        let n = sys.n();
        // A permutation that fixes the reference node n.
        let perm: Vec<usize> = (0..n).map(|i| if i < n - 1 { (i + 5) % (n - 1) } else { i }).collect();
        let mut edges = Vec::new();
        for (i, j) in sys.graph().edges() {
            edges.push((perm[i], perm[j]));
        }
        let relabeled_graph = DirectedGraph::from_edges(n, &edges).unwrap();
        let inv: Vec<usize> = {
            let mut v = vec![0; n];
            for (i, &pi) in perm.iter().enumerate() {
                v[pi] = i;
            }
            v
        };
        let covs = sys.covs().clone();
        let relabeled_covs = CovariateSet::from_fn(n, sys.p(), |i, j| covs.pair(inv[i], inv[j]).to_vec());
        let mut d = vec![0.0; n];
        let mut b = vec![0.0; n];
        for i in 0..n {
            d[perm[i]] = sys.d_target()[i];
            b[perm[i]] = sys.b_target()[i];
        }
        let relabeled = MomentSystem::with_float_targets(relabeled_graph, relabeled_covs, d, b).unwrap();

        let cfg = SolverConfig::default();
        let base = fit(&sys, &cfg).unwrap();
        let other = fit(&relabeled, &cfg).unwrap();
        assert!(base.exists && other.exists);
        for i in 0..n {
            assert!((other.params.alpha[perm[i]] - base.params.alpha[i]).abs() < 1e-7);
            assert!((other.params.beta[perm[i]] - base.params.beta[i]).abs() < 1e-7);
        }
        for k in 0..sys.p() {
            assert!((other.params.gamma[k] - base.params.gamma[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn fast_inner_steps_reach_the_same_root() {
        let (sys, _) = simulated_system(30, 5);
        let exact = fit(&sys, &SolverConfig::default()).unwrap();
        let fast_cfg = SolverConfig { fast_inner: true, ..SolverConfig::default() };
        let fast = fit(&sys, &fast_cfg).unwrap();
        assert!(exact.exists, "exact: {:?}", exact.reason);
        assert!(fast.exists, "fast: {:?}", fast.reason);
        assert!(fast.inner_iters > exact.inner_iters);
        for i in 0..sys.n() {
            assert!((fast.params.alpha[i] - exact.params.alpha[i]).abs() < 1e-6);
        }
        for k in 0..sys.p() {
            assert!((fast.params.gamma[k] - exact.params.gamma[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn out_of_range_targets_short_circuit_to_nonexistence() {
        let n = 6;
        let graph = DirectedGraph::empty(n);
        let covs = CovariateSet::zeros(n, 0);
        let mut d = vec![2.0; n];
        let b = vec![2.0; n];
        d[3] = 0.0;
        let sys = MomentSystem::with_float_targets(graph, covs, d, b).unwrap();
        let fit = fit(&sys, &SolverConfig::default()).unwrap();
        assert!(!fit.exists);
        assert_eq!(fit.inner_iters, 0);
        assert_eq!(
            fit.reason,
            Some(NonexistenceReason::TargetOutOfRange { side: "out", index: 3, value: 0.0, limit: 5.0 })
        );

        // Negative noisy targets and saturated targets fail the same check.
        let sys2 = MomentSystem::with_float_targets(
            DirectedGraph::empty(n),
            CovariateSet::zeros(n, 0),
            vec![2.0; n],
            vec![2.0, 5.0, 2.0, 2.0, 2.0, 2.0],
        )
        .unwrap();
        assert!(matches!(
            infeasible_target(&sys2),
            Some(NonexistenceReason::TargetOutOfRange { side: "in", index: 1, .. })
        ));
        // The reference node's in-degree target is exempt.
        let sys3 = MomentSystem::with_float_targets(
            DirectedGraph::empty(n),
            CovariateSet::zeros(n, 0),
            vec![2.0; n],
            vec![2.0, 2.0, 2.0, 2.0, 2.0, -4.0],
        )
        .unwrap();
        assert!(infeasible_target(&sys3).is_none());
    }

    #[test]
    fn inconsistent_degree_totals_are_certified_up_front() {
        let mk = |d: Vec<f64>, b: Vec<f64>| {
            let n = d.len();
            MomentSystem::with_float_targets(
                DirectedGraph::empty(n),
                CovariateSet::zeros(n, 0),
                d,
                b,
            )
            .unwrap()
        };
        // Implied reference-column total 0.6 - 2.1 < 0.
        let low = mk(vec![0.2, 0.2, 0.2], vec![1.9, 0.2, 0.2]);
        let res = fit(&low, &SolverConfig::default()).unwrap();
        assert!(!res.exists);
        assert_eq!(res.inner_iters, 0);
        assert!(matches!(
            res.reason,
            Some(NonexistenceReason::AggregateInfeasible { total, limit })
                if (total + 1.5).abs() < 1e-12 && limit == 2.0
        ));
        // Implied total 15 - 8 = 7 exceeds n - 1 = 4.
        let high = mk(vec![3.0; 5], vec![2.0; 5]);
        assert!(matches!(
            infeasible_target(&high),
            Some(NonexistenceReason::AggregateInfeasible { total, .. }) if total == 7.0
        ));
        // A consistent total passes.
        let ok = mk(vec![1.0; 3], vec![1.0; 3]);
        assert!(infeasible_target(&ok).is_none());
    }

    #[test]
    fn unrealizable_interior_targets_are_detected_dynamically() {
        // Every coordinate and the aggregate total are in range, but the
        // nearly saturated rows 1 and 2 force column 1 above its target.
        let n = 3;
        let graph = DirectedGraph::empty(n);
        let covs = CovariateSet::zeros(n, 0);
        let sys = MomentSystem::with_float_targets(
            graph,
            covs,
            vec![1.9, 1.9, 0.1],
            vec![0.5, 1.9, 1.5],
        )
        .unwrap();
        assert!(infeasible_target(&sys).is_none());
        let fit = fit(&sys, &SolverConfig::default()).unwrap();
        assert!(!fit.exists);
        assert!(
            matches!(
                fit.reason,
                Some(
                    NonexistenceReason::Diverged { .. }
                        | NonexistenceReason::InnerIterationLimit { .. }
                        | NonexistenceReason::SingularJacobian { .. }
                        | NonexistenceReason::StalledLineSearch { .. }
                )
            ),
            "reason: {:?}",
            fit.reason
        );
    }

    #[test]
    fn backtracking_still_finds_the_root() {
        let (sys, _) = simulated_system(15, 9);
        let plain = fit(&sys, &SolverConfig::default()).unwrap();
        let damped_cfg = SolverConfig { backtracking: true, ..SolverConfig::default() };
        let damped = fit(&sys, &damped_cfg).unwrap();
        assert!(plain.exists && damped.exists);
        for i in 0..sys.n() {
            assert!((damped.params.alpha[i] - plain.params.alpha[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn initial_point_is_finite_for_extreme_targets() {
        let n = 5;
        let sys = MomentSystem::<f64>::with_float_targets(
            DirectedGraph::empty(n),
            CovariateSet::zeros(n, 1),
            vec![0.0, 4.0, -3.0, 2.0, 9.0],
            vec![2.0; n],
        )
        .unwrap();
        let start = initial_params(&sys);
        assert!(start.alpha.iter().all(|x| x.is_finite()));
        assert!(start.beta.iter().all(|x| x.is_finite()));
        assert_eq!(start.gamma, vec![0.0]);
    }

    /// Tiny graphs land on boundary degree sequences often, and some of
    /// them saturate the degree block before the divergence bound trips.
    /// Those must surface as nonexistence, never as a linear-algebra error.
    #[test]
    fn boundary_sequences_never_escalate_to_errors() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 4;
        for _ in 0..200 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let covs = CovariateSet::from_fn(n, 1, |i, j| vec![(x[i] - x[j]).abs()]);
            let mut truth = ModelParams::null(n, 1);
            for a in truth.alpha.iter_mut() {
                *a = rng.gen_range(-0.5..0.5);
            }
            for b in truth.beta.iter_mut().take(n - 1) {
                *b = rng.gen_range(-0.5..0.5);
            }
            truth.gamma[0] = rng.gen_range(-0.5..0.5);
            let graph = sample_graph(&truth, &covs, &mut rng);
            let (d, b) = graph.degree_sequences();
            let release = crate::dp::release_from_degrees(
                &d,
                &b,
                PrivacyBudget::<f64>::Infinite,
                AlphaFormula::EpsilonOverTwo,
                0,
                &mut rng,
            );
            let sys = MomentSystem::new(graph, covs, &release).unwrap();
            fit(&sys, &SolverConfig::default()).expect("boundary cases are not errors");
        }
    }
}
