//! Command-line surface: degree release, model fitting, Monte-Carlo runs,
//! report printing, and mirror-format conversion.
//!
//! Exit codes: 0 success; 2 validation or parse failure; 3 the fit declared
//! that no estimate exists (the JSON diagnostic is still written); 4 the
//! covariate information is degenerate. Every run that touches a privacy
//! budget logs the resolved noise scale, sub-exponential parameter, and
//! total noise variance to stderr.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use crate::dp::{release_bidegree, AlphaFormula, PrivacyBudget};
use crate::inference::{gamma_inference, ThetaInference};
use crate::io::{
    self, AttributeTable, Diagnostics, FitReport, GammaRow, NodeRow,
};
use crate::moment::{MomentError, MomentSystem};
use crate::sim::{run_scenario, write_reports, Scenario, SimError};
use crate::solver::{fit as run_fit, NonexistenceReason, SolverConfig};

#[derive(Parser)]
#[command(
    name = "dpdg",
    version,
    about = "Directed network models fitted from privately released degrees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// How the noise scale is derived from epsilon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum FormulaArg {
    /// alpha = exp(-epsilon/2), satisfying the stated privacy level.
    #[default]
    Consistent,
    /// alpha = exp(-2/epsilon), as printed in the source analysis.
    Paper,
}

impl FormulaArg {
    fn formula(self) -> AlphaFormula {
        match self {
            FormulaArg::Consistent => AlphaFormula::EpsilonOverTwo,
            FormulaArg::Paper => AlphaFormula::TwoOverEpsilon,
        }
    }

    fn label(self) -> &'static str {
        match self {
            FormulaArg::Consistent => "consistent",
            FormulaArg::Paper => "paper",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Release the noisy bi-degree sequence of a graph.
    Release {
        /// Edge list CSV with a src,dst header.
        #[arg(long)]
        graph: PathBuf,
        /// Privacy budget epsilon (> 0).
        #[arg(long)]
        epsilon: f64,
        /// Noise seed.
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        alpha_formula: FormulaArg,
        /// Output JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the model to a graph whose degrees are released with noise.
    Fit {
        /// Edge list CSV with a src,dst header.
        #[arg(long)]
        graph: PathBuf,
        /// Node attribute CSV with a node,... header.
        #[arg(long)]
        attrs: PathBuf,
        /// JSON array of covariate rules.
        #[arg(long)]
        schema: PathBuf,
        /// Privacy budget epsilon (> 0).
        #[arg(long)]
        epsilon: f64,
        /// Noise seed.
        #[arg(long)]
        seed: u64,
        /// Fit to the exact degrees instead of a noisy release.
        #[arg(long)]
        no_noise: bool,
        #[arg(long, value_enum, default_value_t)]
        alpha_formula: FormulaArg,
        /// Output JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Monte-Carlo scenarios and write coverage CSVs.
    Simulate {
        /// Scenario JSON (one object or an array).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for coverage.csv, gamma.csv, qq_*.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the tables from a simulation output directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Convert whitespace-matrix files into the canonical CSVs.
    Convert {
        /// Square 0/1 adjacency matrix, one row per line.
        #[arg(long)]
        adjacency: PathBuf,
        /// Node-by-attribute numeric matrix, one row per node.
        #[arg(long)]
        attributes: PathBuf,
        /// Comma-separated attribute names, one per column.
        #[arg(long)]
        names: String,
        #[arg(long)]
        out_graph: PathBuf,
        #[arg(long)]
        out_attrs: PathBuf,
    },
}

/// Parses arguments, dispatches, and maps failures to exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_degenerate(&err) {
                4
            } else {
                2
            }
        }
    }
}

fn is_degenerate(err: &anyhow::Error) -> bool {
    match err.downcast_ref::<MomentError>() {
        Some(MomentError::Degenerate { .. }) => true,
        _ => matches!(
            err.downcast_ref::<SimError>(),
            Some(SimError::Moment(MomentError::Degenerate { .. }))
        ),
    }
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Release { graph, epsilon, seed, alpha_formula, out } => {
            cmd_release(graph, epsilon, seed, alpha_formula, out)
        }
        Command::Fit { graph, attrs, schema, epsilon, seed, no_noise, alpha_formula, out } => {
            cmd_fit(graph, attrs, schema, epsilon, seed, no_noise, alpha_formula, out)
        }
        Command::Simulate { config, out } => cmd_simulate(config, out),
        Command::Report { input } => cmd_report(input),
        Command::Convert { adjacency, attributes, names, out_graph, out_attrs } => {
            cmd_convert(adjacency, attributes, names, out_graph, out_attrs)
        }
    }
}

fn log_accounting(label: &str, n: usize, budget: PrivacyBudget<f64>, formula: AlphaFormula) {
    match budget.epsilon() {
        Some(epsilon) => eprintln!(
            "privacy[{label}]: n={n} epsilon={epsilon} alpha_n={:.6} kappa_n={:.6} s_n_sq={:.6}",
            budget.alpha(formula).expect("finite budget"),
            budget.kappa(formula),
            budget.summed_noise_variance(n, formula),
        ),
        None => eprintln!("privacy[{label}]: n={n} epsilon=infinity (exact degrees) s_n_sq=0"),
    }
}

fn cmd_release(
    graph: PathBuf,
    epsilon: f64,
    seed: u64,
    alpha_formula: FormulaArg,
    out: Option<PathBuf>,
) -> anyhow::Result<i32> {
    let (_, g, warnings) = io::read_graph(&graph)
        .with_context(|| format!("reading {}", graph.display()))?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let budget = PrivacyBudget::finite(epsilon)?;
    let formula = alpha_formula.formula();
    log_accounting("release", g.n(), budget, formula);
    let release = release_bidegree(&g, budget, formula, seed);
    match out {
        Some(path) => io::write_release(&path, &release)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, &release)?;
            writeln!(lock)?;
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    graph: PathBuf,
    attrs: PathBuf,
    schema: PathBuf,
    epsilon: f64,
    seed: u64,
    no_noise: bool,
    alpha_formula: FormulaArg,
    out: Option<PathBuf>,
) -> anyhow::Result<i32> {
    let ds = io::load_dataset(&graph, &attrs, &schema).context("loading data set")?;
    for w in &ds.warnings {
        eprintln!("warning: {w}");
    }
    if !ds.dropped_labels.is_empty() {
        eprintln!(
            "note: dropped {} node(s) without outgoing or incoming edges: {:?}",
            ds.dropped_labels.len(),
            ds.dropped_labels
        );
    }
    let budget = if no_noise { PrivacyBudget::Infinite } else { PrivacyBudget::finite(epsilon)? };
    let formula = alpha_formula.formula();
    let n = ds.graph.n();
    log_accounting("fit", n, budget, formula);
    let release = release_bidegree(&ds.graph, budget, formula, seed);
    let sys = MomentSystem::new(ds.graph, ds.covs, &release)?;
    let result = run_fit(&sys, &SolverConfig::default())?;

    let mut diagnostics = Diagnostics {
        epsilon: budget.epsilon(),
        alpha_formula: alpha_formula.label().into(),
        alpha_n: budget.alpha(formula),
        kappa_n: budget.epsilon().map(|_| budget.kappa(formula)),
        s_n_sq: budget.summed_noise_variance(n, formula),
        v2n2n: None,
        lambda_n: None,
        residual_f: None,
        residual_q: None,
        inner_iters: result.inner_iters,
        outer_iters: result.outer_iters,
        n_input: ds.n_input,
        n_used: n,
        dropped_nodes: ds.dropped_labels,
        warnings: ds.warnings,
    };

    let write = |report: &FitReport| -> anyhow::Result<()> {
        match &out {
            Some(path) => {
                io::write_fit_report(fs::File::create(path)?, report)?;
            }
            None => io::write_fit_report(std::io::stdout().lock(), report)?,
        }
        Ok(())
    };

    if !result.exists {
        let reason = result.reason.expect("nonexistent fits carry a reason");
        eprintln!("no estimate exists: {reason}");
        if let NonexistenceReason::TargetOutOfRange { index, .. } = &reason {
            eprintln!("note: node index {index} carries label {}", ds.labels[*index]);
        }
        let report = FitReport {
            exists: false,
            reason: Some(reason.to_string()),
            nodes: Vec::new(),
            gamma: Vec::new(),
            diagnostics,
        };
        write(&report)?;
        return Ok(3);
    }

    let probs = sys.probs(&result.params);
    let jac = sys.jacobian_cached(&probs);
    let theta_inf = ThetaInference::new(&jac, budget, formula);
    let schur = sys.schur(&jac, &probs)?;
    let ginf = gamma_inference(&sys, &result.params, &schur)?;

    diagnostics.v2n2n = Some(jac.v2n2n);
    diagnostics.lambda_n = Some(schur.lambda_diag(n)?);
    diagnostics.residual_f = Some(result.residual_f);
    diagnostics.residual_q = Some(result.residual_q);

    let nodes = (0..n)
        .map(|i| NodeRow {
            node: ds.labels[i],
            d_tilde: release.d_tilde[i],
            alpha: result.params.alpha[i],
            se_alpha: theta_inf.se_alpha(i),
            b_tilde: release.b_tilde[i],
            beta: result.params.beta[i],
            se_beta: theta_inf.se_beta(i),
        })
        .collect();
    let gamma = (0..sys.p())
        .map(|k| GammaRow {
            name: ds.covariate_names[k].clone(),
            estimate: ginf.estimate[k],
            corrected: ginf.corrected[k],
            se: ginf.se[k],
            p_value: ginf.p_values[k],
        })
        .collect();
    let report = FitReport { exists: true, reason: None, nodes, gamma, diagnostics };
    write(&report)?;
    Ok(0)
}

fn cmd_simulate(config: PathBuf, out: PathBuf) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&config)
        .with_context(|| format!("reading {}", config.display()))?;
    let scenarios: Vec<Scenario> = match serde_json::from_str::<Vec<Scenario>>(&text) {
        Ok(list) => list,
        Err(_) => vec![serde_json::from_str(&text)
            .context("config must be a scenario object or an array of them")?],
    };
    if scenarios.is_empty() {
        bail!("config contains no scenarios");
    }
    let mut reports = Vec::with_capacity(scenarios.len());
    for scenario in &scenarios {
        log_accounting(
            "simulate",
            scenario.n,
            scenario.epsilon.budget(scenario.n),
            AlphaFormula::EpsilonOverTwo,
        );
        let report = run_scenario(scenario)?;
        println!(
            "scenario n={} L={} epsilon={}: {}/{} replicates admit an estimate ({} released targets infeasible)",
            scenario.n,
            scenario.l.label(),
            scenario.epsilon.label(),
            report.reps_existing,
            report.reps_total,
            report.reps_infeasible
        );
        reports.push(report);
    }
    write_reports(&out, &reports)?;
    println!("wrote {}", out.join("coverage.csv").display());
    Ok(0)
}

fn cmd_report(input: PathBuf) -> anyhow::Result<i32> {
    for name in ["coverage.csv", "gamma.csv"] {
        let path = input.join(name);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut rows: Vec<Vec<String>> = text
            .lines()
            .map(|line| line.split(',').map(String::from).collect())
            .collect();
        if rows.is_empty() {
            bail!("{name} is empty");
        }
        let cols = rows[0].len();
        for row in &rows {
            if row.len() != cols {
                bail!("{name} has ragged rows");
            }
        }
        let widths: Vec<usize> = (0..cols)
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        println!("{name}");
        for (idx, row) in rows.iter_mut().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell:>w$}"))
                .collect();
            println!("  {}", line.join("  "));
            if idx == 0 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                println!("  {}", rule.join("  "));
            }
        }
        println!();
    }
    Ok(0)
}

fn cmd_convert(
    adjacency: PathBuf,
    attributes: PathBuf,
    names: String,
    out_graph: PathBuf,
    out_attrs: PathBuf,
) -> anyhow::Result<i32> {
    let adj_rows = io::parse_matrix(
        &fs::read_to_string(&adjacency)
            .with_context(|| format!("reading {}", adjacency.display()))?,
    )?;
    let n = adj_rows.len();
    let edges = io::adjacency_to_edges(&adj_rows)?;
    let attr_rows = io::parse_matrix(
        &fs::read_to_string(&attributes)
            .with_context(|| format!("reading {}", attributes.display()))?,
    )?;
    if attr_rows.len() != n {
        bail!("adjacency has {n} nodes but the attribute matrix has {} rows", attr_rows.len());
    }
    let columns: Vec<String> = names.split(',').map(|s| s.trim().to_string()).collect();
    if columns.len() != attr_rows[0].len() {
        bail!(
            "{} attribute names given for {} columns",
            columns.len(),
            attr_rows[0].len()
        );
    }
    let table = AttributeTable {
        labels: (1..=n as i64).collect(),
        columns,
        values: attr_rows,
    };
    io::write_edge_csv(&out_graph, &edges)?;
    io::write_attribute_csv(&out_attrs, &table)?;
    eprintln!("converted {n} nodes, {} edges", edges.len());
    Ok(0)
}
