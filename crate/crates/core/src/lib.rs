//! Degree-private directed graph models.
//!
//! This crate fits the covariate-assisted directed beta-model to network
//! data whose bi-degree sequence is released under edge differential privacy.
//! Each directed edge i -> j is an independent Bernoulli draw with
//!
//! ```text
//! P(a_ij = 1) = exp(Z_ij' gamma + alpha_i + beta_j) / (1 + exp(...)),
//! ```
//!
//! where `alpha_i` measures out-edge propensity, `beta_j` in-edge propensity
//! (with `beta_n = 0` for identifiability), and `gamma` the effect of pair
//! covariates `Z_ij`. The data curator publishes the out/in degree sequences
//! with integer discrete-Laplace noise calibrated to an epsilon budget;
//! estimation then proceeds by moment equations that match the noisy degrees
//! and the covariate-weighted edge sums to their model expectations.
//!
//! The pieces, bottom up:
//!
//! - [`model`]: graphs, covariates, parameters, edge probabilities, sampling.
//! - [`dp`]: the discrete Laplace distribution and the private degree release.
//! - [`moment`]: the estimating equations, their structured Jacobian, its
//!   closed-form approximate inverse, and the Schur complement for `gamma`.
//! - [`solver`]: the two-stage Newton iteration with nonexistence detection.
//! - [`inference`]: standard errors (including the privacy-noise inflation),
//!   standardized pair statistics, and the analytic bias correction of
//!   `gamma`.
//! - [`sim`]: the Monte-Carlo harness producing coverage tables and
//!   QQ exports.
//! - [`io`]: edge-list/attribute ingestion and (de)serialization of releases
//!   and fit reports.
//! - [`cli`]: the `dpdg` command-line surface.
//!
//! The numeric core is generic over the scalar type through
//! [`scalar::Real`]; the aliases below fix `f64` for ordinary use.

pub mod scalar;
pub mod linalg;
pub mod model;
pub mod dp;
pub mod moment;
pub mod solver;
pub mod inference;
pub mod sim;
pub mod io;
pub mod cli;

pub use dp::{AlphaFormula, DegreeRelease, DiscreteLaplace, PrivacyBudget};
pub use model::DirectedGraph;
pub use scalar::Real;

/// Pair covariates with `f64` entries.
pub type Covariates = model::CovariateSet<f64>;
/// Model parameters with `f64` entries.
pub type Params = model::ModelParams<f64>;
/// Linear-predictor bounds with `f64` entries.
pub type Bounds = model::ModelBounds<f64>;
/// Privacy budget with an `f64` epsilon.
pub type Budget = dp::PrivacyBudget<f64>;
/// Structured Jacobian with `f64` entries.
pub type Jacobian = moment::StructuredJacobian<f64>;
/// Moment system with `f64` targets.
pub type Moments = moment::MomentSystem<f64>;
/// Solver configuration with `f64` tolerances.
pub type Config = solver::SolverConfig<f64>;
/// Fit outcome with `f64` estimates.
pub type Fitted = solver::FitResult<f64>;
