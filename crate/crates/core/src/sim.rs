//! Monte-Carlo harness: synthetic scenarios, replicated fits, coverage
//! summaries, and CSV exports.
//!
//! A scenario pins the node count, the strength profile of the node
//! parameters, the privacy budget, the covariate effect, and the seed.
//! Node parameters fall linearly from `L` to 0, both outgoing and
//! incoming; covariates are one balanced binary attribute interacting by
//! sign and one Beta(2,2) attribute entering by absolute distance. Each
//! replicate resamples covariates (unless pinned), samples a graph, adds
//! degree noise, refits, and studentizes the pairwise contrasts of the
//! node parameters plus the covariate effect.
//!
//! Replicates run in parallel; results are collected by index, so a report
//! is a pure function of its scenario. `DPDG_THREADS` caps the pool.

use std::io::Write as _;
use std::path::Path;

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Beta;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::dp::{release_from_degrees, AlphaFormula, PrivacyBudget};
use crate::inference::{gamma_inference, pair_se, pair_z, PairKind, ThetaInference};
use crate::model::{sample_graph, CovariateSet, ModelParams};
use crate::moment::{MomentError, MomentSystem};
use crate::solver::{fit, NonexistenceReason, SolverConfig};

/// Two-sided 95% normal critical value.
pub const Z_CRIT: f64 = 1.959964;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {reason}")]
    BadScenario { reason: String },
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Strength profile of the node parameters: both sequences fall linearly
/// from `L` down to 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LKind {
    Zero,
    LogLogN,
    SqrtLogN,
    LogN,
}

impl LKind {
    pub fn value(self, n: usize) -> f64 {
        let ln = (n as f64).ln();
        match self {
            LKind::Zero => 0.0,
            LKind::LogLogN => ln.ln(),
            LKind::SqrtLogN => ln.sqrt(),
            LKind::LogN => ln,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LKind::Zero => "zero",
            LKind::LogLogN => "loglogn",
            LKind::SqrtLogN => "sqrtlogn",
            LKind::LogN => "logn",
        }
    }
}

/// Privacy budget schedule as a function of n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpsilonKind {
    #[serde(rename = "two")]
    Two,
    #[serde(rename = "logn_n4")]
    LogNOverN4,
    #[serde(rename = "logn_n2")]
    LogNOverN2,
    #[serde(rename = "infinity")]
    Infinity,
}

impl EpsilonKind {
    pub fn budget(self, n: usize) -> PrivacyBudget<f64> {
        let ln = (n as f64).ln();
        match self {
            EpsilonKind::Two => PrivacyBudget::finite(2.0).expect("positive"),
            EpsilonKind::LogNOverN4 => {
                PrivacyBudget::finite(ln / (n as f64).powf(0.25)).expect("positive")
            }
            EpsilonKind::LogNOverN2 => {
                PrivacyBudget::finite(ln / (n as f64).sqrt()).expect("positive")
            }
            EpsilonKind::Infinity => PrivacyBudget::Infinite,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EpsilonKind::Two => "two",
            EpsilonKind::LogNOverN4 => "logn_n4",
            EpsilonKind::LogNOverN2 => "logn_n2",
            EpsilonKind::Infinity => "infinity",
        }
    }
}

fn default_gamma() -> Vec<f64> {
    vec![1.0, 1.5]
}

fn default_reps() -> usize {
    200
}

/// One Monte-Carlo configuration. `pairs` are 1-based node pairs whose
/// contrasts are studentized; they default to the head, middle, and tail
/// of the strength profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: LKind,
    pub epsilon: EpsilonKind,
    #[serde(default = "default_gamma")]
    pub gamma: Vec<f64>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub fixed_covariates: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |reason: String| Err(SimError::BadScenario { reason });
        if self.n < 3 {
            return bad(format!("n = {} is below the minimum of 3", self.n));
        }
        if self.gamma.len() != 2 {
            return bad(format!(
                "the covariate scheme is two-dimensional; got {} effects",
                self.gamma.len()
            ));
        }
        if self.reps == 0 || self.reps > 1000 {
            return bad(format!("reps = {} outside 1..=1000", self.reps));
        }
        for &(i, j) in &self.pairs {
            if i == 0 || j == 0 || i > self.n || j > self.n || i == j {
                return bad(format!("pair ({i},{j}) is not two distinct nodes in 1..={}", self.n));
            }
        }
        Ok(())
    }

    /// Pairs to report, with the defaults filled in (1-based).
    pub fn effective_pairs(&self) -> Vec<(usize, usize)> {
        if self.pairs.is_empty() {
            vec![(1, 2), (self.n / 2, self.n / 2 + 1), (self.n - 1, self.n)]
        } else {
            self.pairs.clone()
        }
    }

    /// True parameters: linear strength profile plus the configured effect.
    pub fn truth(&self) -> ModelParams<f64> {
        let n = self.n;
        let l = self.l.value(n);
        let alpha: Vec<f64> = (0..n).map(|i| (n - 1 - i) as f64 * l / (n as f64 - 1.0)).collect();
        let beta = alpha.clone();
        ModelParams::new(alpha, beta, self.gamma.clone()).expect("profile ends at zero")
    }
}

/// Draws one binary sign attribute (P(+1) = 0.3) and one Beta(2,2)
/// attribute, paired as (sign match, absolute distance).
pub fn draw_covariates<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CovariateSet<f64> {
    let beta = Beta::new(2.0, 2.0).expect("valid shape");
    let x1: Vec<f64> = (0..n).map(|_| if rng.gen::<f64>() < 0.3 { 1.0 } else { -1.0 }).collect();
    let x2: Vec<f64> = (0..n).map(|_| beta.sample(rng)).collect();
    CovariateSet::from_fn(n, 2, |i, j| vec![x1[i] * x1[j], (x2[i] - x2[j]).abs()])
}

/// Coverage of one pairwise contrast across replicates.
#[derive(Clone, Debug)]
pub struct PairSummary {
    pub kind: PairKind,
    /// 1-based node pair.
    pub pair: (usize, usize),
    /// Percent of existing replicates whose 95% interval covers the truth.
    pub coverage_pct: f64,
    /// Mean 95% interval length over existing replicates.
    pub mean_ci_len: f64,
    /// Studentized contrasts, one per existing replicate.
    pub z_values: Vec<f64>,
}

/// Coverage of one covariate coordinate across replicates.
#[derive(Clone, Debug)]
pub struct GammaSummary {
    /// False for the raw estimate, true for the bias-corrected one.
    pub corrected: bool,
    /// 1-based coordinate.
    pub coordinate: usize,
    pub coverage_pct: f64,
    pub mean_ci_len: f64,
    pub mean_abs_bias: f64,
}

/// Everything a scenario produces.
#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub reps_total: usize,
    pub reps_existing: usize,
    /// Nonexistent replicates whose released targets carry a feasibility
    /// certificate: a degree target or the aggregate total out of range.
    pub reps_infeasible: usize,
    pub pairs: Vec<PairSummary>,
    pub gammas: Vec<GammaSummary>,
}

impl ScenarioReport {
    pub fn nonexist_pct(&self) -> f64 {
        100.0 * (self.reps_total - self.reps_existing) as f64 / self.reps_total as f64
    }

    /// Nonexistent replicates without a feasibility certificate, where the
    /// iteration itself gave up. Zero on healthy scenarios.
    pub fn uncertified_nonexist(&self) -> usize {
        self.reps_total - self.reps_existing - self.reps_infeasible
    }
}

struct RepOutcome {
    exists: bool,
    infeasible: bool,
    /// One `[xi, zeta, eta]` triple of z values per pair.
    pair_z: Vec<[f64; 3]>,
    /// Matching interval lengths.
    pair_len: Vec<[f64; 3]>,
    gamma_raw: Vec<f64>,
    gamma_bc: Vec<f64>,
    gamma_se: Vec<f64>,
}

const PAIR_KINDS: [PairKind; 3] = [PairKind::AlphaDiff, PairKind::MixedSum, PairKind::BetaDiff];

fn run_rep(
    scenario: &Scenario,
    truth: &ModelParams<f64>,
    fixed: Option<&CovariateSet<f64>>,
    pairs: &[(usize, usize)],
    rep: usize,
) -> Result<RepOutcome, MomentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed.wrapping_add(rep as u64));
    let covs = match fixed {
        Some(c) => c.clone(),
        None => draw_covariates(scenario.n, &mut rng),
    };
    let budget = scenario.epsilon.budget(scenario.n);
    let formula = AlphaFormula::EpsilonOverTwo;
    let graph = sample_graph(truth, &covs, &mut rng);
    let (d, b) = graph.degree_sequences();
    let release = release_from_degrees(
        &d,
        &b,
        budget,
        formula,
        scenario.seed.wrapping_add(rep as u64),
        &mut rng,
    );
    let sys = MomentSystem::new(graph, covs, &release)?;
    let fit = fit(&sys, &SolverConfig::default())?;
    if !fit.exists {
        let infeasible = matches!(
            fit.reason,
            Some(
                NonexistenceReason::TargetOutOfRange { .. }
                    | NonexistenceReason::AggregateInfeasible { .. }
            )
        );
        return Ok(RepOutcome {
            exists: false,
            infeasible,
            pair_z: Vec::new(),
            pair_len: Vec::new(),
            gamma_raw: Vec::new(),
            gamma_bc: Vec::new(),
            gamma_se: Vec::new(),
        });
    }
    let probs = sys.probs(&fit.params);
    let jac = sys.jacobian_cached(&probs);
    let theta_inf = ThetaInference::new(&jac, budget, formula);
    let mut z_rows = Vec::with_capacity(pairs.len());
    let mut len_rows = Vec::with_capacity(pairs.len());
    for &(i1, j1) in pairs {
        let (i, j) = (i1 - 1, j1 - 1);
        let mut zs = [0.0; 3];
        let mut lens = [0.0; 3];
        for (s, kind) in PAIR_KINDS.into_iter().enumerate() {
            zs[s] = pair_z(&theta_inf, &fit.params, truth, kind, i, j);
            lens[s] = 2.0 * Z_CRIT * pair_se(&theta_inf, kind, i, j);
        }
        z_rows.push(zs);
        len_rows.push(lens);
    }
    let schur = sys.schur(&jac, &probs)?;
    let ginf = gamma_inference(&sys, &fit.params, &schur)?;
    Ok(RepOutcome {
        exists: true,
        infeasible: false,
        pair_z: z_rows,
        pair_len: len_rows,
        gamma_raw: ginf.estimate,
        gamma_bc: ginf.corrected,
        gamma_se: ginf.se,
    })
}

/// Runs every replicate of a scenario and aggregates coverage. Replicates
/// are independent and deterministic in (seed, index).
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioReport, SimError> {
    scenario.validate()?;
    let truth = scenario.truth();
    let pairs = scenario.effective_pairs();
    let fixed = if scenario.fixed_covariates {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        Some(draw_covariates(scenario.n, &mut rng))
    } else {
        None
    };

    let run = || -> Result<Vec<RepOutcome>, MomentError> {
        use rayon::prelude::*;
        (0..scenario.reps)
            .into_par_iter()
            .map(|rep| run_rep(scenario, &truth, fixed.as_ref(), &pairs, rep))
            .collect()
    };
    let outcomes = match std::env::var("DPDG_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(threads) if threads > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| SimError::BadScenario { reason: format!("thread pool: {e}") })?
            .install(run),
        _ => run(),
    }?;

    let existing: Vec<&RepOutcome> = outcomes.iter().filter(|o| o.exists).collect();
    let m = existing.len();
    let mut pair_summaries = Vec::new();
    for (pi, &pair) in pairs.iter().enumerate() {
        for (s, kind) in PAIR_KINDS.into_iter().enumerate() {
            let z_values: Vec<f64> = existing.iter().map(|o| o.pair_z[pi][s]).collect();
            let covered = z_values.iter().filter(|z| z.abs() <= Z_CRIT).count();
            let mean_len = existing.iter().map(|o| o.pair_len[pi][s]).sum::<f64>() / m.max(1) as f64;
            pair_summaries.push(PairSummary {
                kind,
                pair,
                coverage_pct: if m == 0 { f64::NAN } else { 100.0 * covered as f64 / m as f64 },
                mean_ci_len: if m == 0 { f64::NAN } else { mean_len },
                z_values,
            });
        }
    }

    let mut gamma_summaries = Vec::new();
    for corrected in [false, true] {
        for k in 0..scenario.gamma.len() {
            let centers: Vec<f64> = existing
                .iter()
                .map(|o| if corrected { o.gamma_bc[k] } else { o.gamma_raw[k] })
                .collect();
            let ses: Vec<f64> = existing.iter().map(|o| o.gamma_se[k]).collect();
            let truth_k = scenario.gamma[k];
            let covered = centers
                .iter()
                .zip(&ses)
                .filter(|(c, s)| (*c - truth_k).abs() <= Z_CRIT * **s)
                .count();
            let mean_len = ses.iter().map(|s| 2.0 * Z_CRIT * s).sum::<f64>() / m.max(1) as f64;
            let mean_bias = centers.iter().map(|c| (c - truth_k).abs()).sum::<f64>() / m.max(1) as f64;
            gamma_summaries.push(GammaSummary {
                corrected,
                coordinate: k + 1,
                coverage_pct: if m == 0 { f64::NAN } else { 100.0 * covered as f64 / m as f64 },
                mean_ci_len: if m == 0 { f64::NAN } else { mean_len },
                mean_abs_bias: if m == 0 { f64::NAN } else { mean_bias },
            });
        }
    }

    Ok(ScenarioReport {
        scenario: scenario.clone(),
        reps_total: scenario.reps,
        reps_existing: m,
        reps_infeasible: outcomes.iter().filter(|o| o.infeasible).count(),
        pairs: pair_summaries,
        gammas: gamma_summaries,
    })
}

fn stat_label(kind: PairKind) -> &'static str {
    match kind {
        PairKind::AlphaDiff => "xi",
        PairKind::MixedSum => "zeta",
        PairKind::BetaDiff => "eta",
    }
}

/// Writes `coverage.csv` (outgoing-contrast rows), `gamma.csv`, and one
/// quantile file per statistic and pair into `dir`.
pub fn write_reports(dir: &Path, reports: &[ScenarioReport]) -> Result<(), SimError> {
    std::fs::create_dir_all(dir)?;
    let mut coverage = std::fs::File::create(dir.join("coverage.csv"))?;
    writeln!(coverage, "n,L,epsilon,pair,coverage_pct,ci_len,nonexist_pct")?;
    for report in reports {
        for summary in &report.pairs {
            if summary.kind != PairKind::AlphaDiff {
                continue;
            }
            writeln!(
                coverage,
                "{},{},{},({};{}),{:.1},{:.4},{:.1}",
                report.scenario.n,
                report.scenario.l.label(),
                report.scenario.epsilon.label(),
                summary.pair.0,
                summary.pair.1,
                summary.coverage_pct,
                summary.mean_ci_len,
                report.nonexist_pct()
            )?;
        }
    }

    let mut gamma = std::fs::File::create(dir.join("gamma.csv"))?;
    writeln!(gamma, "n,L,epsilon,estimator,coordinate,coverage,length,mean_abs_bias")?;
    for report in reports {
        for summary in &report.gammas {
            writeln!(
                gamma,
                "{},{},{},{},{},{:.1},{:.4},{:.4}",
                report.scenario.n,
                report.scenario.l.label(),
                report.scenario.epsilon.label(),
                if summary.corrected { "bc" } else { "raw" },
                summary.coordinate,
                summary.coverage_pct,
                summary.mean_ci_len,
                summary.mean_abs_bias
            )?;
        }
    }

    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    for report in reports {
        for summary in &report.pairs {
            if summary.z_values.is_empty() {
                continue;
            }
            let name = format!(
                "qq_{}_{}_{}.csv",
                stat_label(summary.kind),
                summary.pair.0,
                summary.pair.1
            );
            let mut file = std::fs::File::create(dir.join(name))?;
            writeln!(file, "theoretical,empirical")?;
            let mut sorted = summary.z_values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite z values"));
            let m = sorted.len() as f64;
            for (k, z) in sorted.iter().enumerate() {
                let q = normal.inverse_cdf((k as f64 + 0.5) / m);
                writeln!(file, "{q:.6},{z:.6}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_scenario() -> Scenario {
        Scenario {
            n: 30,
            l: LKind::LogLogN,
            epsilon: EpsilonKind::Two,
            gamma: vec![1.0, 1.5],
            reps: 8,
            seed: 42,
            pairs: vec![],
            fixed_covariates: false,
        }
    }

    #[test]
    fn scenario_json_round_trips_with_defaults() {
        let text = r#"{"n":100,"L":"loglogn","epsilon":"two","seed":7}"#;
        let s: Scenario = serde_json::from_str(text).unwrap();
        assert_eq!(s.gamma, vec![1.0, 1.5]);
        assert_eq!(s.reps, 200);
        assert!(s.pairs.is_empty());
        assert!(!s.fixed_covariates);
        assert_eq!(s.effective_pairs(), vec![(1, 2), (50, 51), (99, 100)]);
        let again: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(again, s);

        let eps: Scenario =
            serde_json::from_str(r#"{"n":50,"L":"logn","epsilon":"logn_n4","seed":1}"#).unwrap();
        assert_eq!(eps.epsilon, EpsilonKind::LogNOverN4);
        assert_eq!(eps.l, LKind::LogN);
    }

    #[test]
    fn strength_profile_falls_linearly_to_zero() {
        let s = Scenario { n: 5, l: LKind::LogN, ..tiny_scenario() };
        let truth = s.truth();
        let l = (5.0f64).ln();
        for i in 0..5 {
            assert!((truth.alpha[i] - (4 - i) as f64 * l / 4.0).abs() < 1e-15);
        }
        assert_eq!(truth.alpha[0], l);
        assert_eq!(truth.alpha[4], 0.0);
        assert_eq!(truth.beta, truth.alpha);
        assert_eq!(truth.gamma, vec![1.0, 1.5]);

        assert_eq!(LKind::Zero.value(100), 0.0);
        assert!((LKind::LogLogN.value(100) - (100.0f64).ln().ln()).abs() < 1e-15);
        assert!((LKind::SqrtLogN.value(100) - (100.0f64).ln().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn epsilon_schedules_match_their_formulas() {
        let n = 100;
        assert_eq!(EpsilonKind::Two.budget(n).epsilon(), Some(2.0));
        let e4 = EpsilonKind::LogNOverN4.budget(n).epsilon().unwrap();
        assert!((e4 - (100.0f64).ln() / (100.0f64).powf(0.25)).abs() < 1e-15);
        let e2 = EpsilonKind::LogNOverN2.budget(n).epsilon().unwrap();
        assert!((e2 - (100.0f64).ln() / 10.0).abs() < 1e-15);
        assert_eq!(EpsilonKind::Infinity.budget(n).epsilon(), None);
    }

    #[test]
    fn covariate_draws_have_the_configured_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 4000;
        let covs = draw_covariates(n, &mut rng);
        // Distances are nonnegative and bounded by the Beta support, with
        // mean |X - Y| = 9/35 for independent Beta(2,2) draws.
        let mut mean_dist = 0.0;
        for i in 0..n {
            let d = covs.pair(i, (i + 1) % n)[1];
            assert!((0.0..1.0).contains(&d));
            mean_dist += d;
        }
        mean_dist /= n as f64;
        assert!((mean_dist - 9.0 / 35.0).abs() < 0.02, "mean distance {mean_dist}");
        // Sign products are +1 with probability p^2 + (1-p)^2 = 0.58.
        let mut agree = 0usize;
        for i in 0..n {
            let s = covs.pair(i, (i + 1) % n)[0];
            assert!(s == 1.0 || s == -1.0);
            if s == 1.0 {
                agree += 1;
            }
        }
        let frac = agree as f64 / n as f64;
        assert!((frac - 0.58).abs() < 0.03, "sign agreement {frac}");
    }

    #[test]
    fn scenario_validation_rejects_bad_input() {
        let mut s = tiny_scenario();
        s.reps = 0;
        assert!(matches!(s.validate(), Err(SimError::BadScenario { .. })));
        let mut s = tiny_scenario();
        s.reps = 1001;
        assert!(s.validate().is_err());
        let mut s = tiny_scenario();
        s.gamma = vec![1.0];
        assert!(s.validate().is_err());
        let mut s = tiny_scenario();
        s.pairs = vec![(1, 1)];
        assert!(s.validate().is_err());
        let mut s = tiny_scenario();
        s.pairs = vec![(0, 2)];
        assert!(s.validate().is_err());
        let mut s = tiny_scenario();
        s.pairs = vec![(1, 31)];
        assert!(s.validate().is_err());
        assert!(tiny_scenario().validate().is_ok());
    }

    #[test]
    fn reports_are_deterministic_and_self_consistent() {
        let scenario = tiny_scenario();
        let a = run_scenario(&scenario).unwrap();
        let b = run_scenario(&scenario).unwrap();
        assert_eq!(a.reps_total, 8);
        assert_eq!(a.reps_existing, b.reps_existing);
        assert_eq!(a.pairs.len(), 9);
        assert_eq!(a.gammas.len(), 4);
        for (x, y) in a.pairs.iter().zip(&b.pairs) {
            assert_eq!(x.z_values, y.z_values);
            assert_eq!(x.coverage_pct, y.coverage_pct);
        }
        for summary in &a.pairs {
            assert_eq!(summary.z_values.len(), a.reps_existing);
            let covered = summary.z_values.iter().filter(|z| z.abs() <= Z_CRIT).count();
            assert_eq!(summary.coverage_pct, 100.0 * covered as f64 / a.reps_existing as f64);
        }
        for summary in &a.gammas {
            assert!(summary.mean_ci_len > 0.0);
            assert!(summary.mean_abs_bias >= 0.0);
        }
    }

    #[test]
    fn fixed_covariates_change_only_the_covariate_draw() {
        let mut scenario = tiny_scenario();
        scenario.fixed_covariates = true;
        let a = run_scenario(&scenario).unwrap();
        let b = run_scenario(&scenario).unwrap();
        for (x, y) in a.pairs.iter().zip(&b.pairs) {
            assert_eq!(x.z_values, y.z_values);
        }
        scenario.fixed_covariates = false;
        let c = run_scenario(&scenario).unwrap();
        assert_ne!(a.pairs[0].z_values, c.pairs[0].z_values);
    }

    #[test]
    fn csv_exports_have_the_documented_shape() {
        let scenario = tiny_scenario();
        let report = run_scenario(&scenario).unwrap();
        let dir = std::env::temp_dir().join(format!("dpdg_sim_test_{}", std::process::id()));
        write_reports(&dir, std::slice::from_ref(&report)).unwrap();

        let coverage = std::fs::read_to_string(dir.join("coverage.csv")).unwrap();
        let mut lines = coverage.lines();
        assert_eq!(lines.next(), Some("n,L,epsilon,pair,coverage_pct,ci_len,nonexist_pct"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].starts_with("30,loglogn,two,(1;2),"));

        let gamma = std::fs::read_to_string(dir.join("gamma.csv")).unwrap();
        assert!(gamma.starts_with("n,L,epsilon,estimator,coordinate,coverage,length,mean_abs_bias"));
        assert_eq!(gamma.lines().count(), 5);
        assert!(gamma.contains("30,loglogn,two,raw,1,"));
        assert!(gamma.contains("30,loglogn,two,bc,2,"));

        let qq = std::fs::read_to_string(dir.join("qq_xi_1_2.csv")).unwrap();
        let qq_rows: Vec<&str> = qq.lines().collect();
        assert_eq!(qq_rows[0], "theoretical,empirical");
        assert_eq!(qq_rows.len() - 1, report.reps_existing);
        // Quantiles of (k - 0.5)/m are symmetric about zero.
        let first: f64 = qq_rows[1].split(',').next().unwrap().parse().unwrap();
        let last: f64 = qq_rows.last().unwrap().split(',').next().unwrap().parse().unwrap();
        assert!((first + last).abs() < 1e-9);

        assert!(dir.join("qq_zeta_1_2.csv").exists());
        assert!(dir.join("qq_eta_15_16.csv").exists());
        assert!(dir.join("qq_xi_29_30.csv").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
