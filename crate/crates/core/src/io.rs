//! File formats: edge lists, node attribute tables, covariate schemas,
//! degree releases, and the fit report.
//!
//! Edge lists are CSV with a `src,dst` header and integer node labels;
//! labels are mapped to contiguous indices in ascending order. Attribute
//! tables are CSV with a leading `node` column naming the node universe.
//! A schema is a JSON array of rules turning node attributes into dyadic
//! covariates, either by category agreement (+1/-1) or by absolute
//! distance in raw units.
//!
//! Nodes without outgoing or without incoming edges carry no information
//! about their own parameter and make the fit degenerate, so the loader
//! strips them iteratively before fitting and reports which labels were
//! dropped.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dp::DegreeRelease;
use crate::model::{CovariateSet, DirectedGraph, ModelError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: self-loop at node {node}")]
    SelfLoop { line: usize, node: i64 },
    #[error("line {line}: node {node} does not appear in the attribute table")]
    UnknownNode { line: usize, node: i64 },
    #[error("expected header {expected:?}, found {found:?}")]
    BadHeader { expected: String, found: String },
    #[error("duplicate node {node} in the attribute table")]
    DuplicateNode { node: i64 },
    #[error("schema: {message}")]
    Schema { message: String },
    #[error("every node lacks outgoing or incoming edges; nothing left to fit")]
    AllNodesDropped,
}

/// A parsed edge list: labeled pairs with their CSV line numbers.
#[derive(Clone, Debug)]
pub struct EdgeRecords {
    pub pairs: Vec<(i64, i64, usize)>,
}

impl EdgeRecords {
    /// Distinct labels in ascending order.
    pub fn labels(&self) -> Vec<i64> {
        let mut labels: Vec<i64> = self.pairs.iter().flat_map(|&(s, d, _)| [s, d]).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// Builds the adjacency over a given node universe. Duplicate edges
    /// collapse with a warning; self-loops and labels outside the universe
    /// are errors.
    pub fn to_graph(&self, labels: &[i64]) -> Result<(DirectedGraph, Vec<String>), IoError> {
        let index = |label: i64, line: usize| {
            labels
                .binary_search(&label)
                .map_err(|_| IoError::UnknownNode { line, node: label })
        };
        let mut graph = DirectedGraph::empty(labels.len());
        let mut warnings = Vec::new();
        for &(src, dst, line) in &self.pairs {
            if src == dst {
                return Err(IoError::SelfLoop { line, node: src });
            }
            let i = index(src, line)?;
            let j = index(dst, line)?;
            if graph.has_edge(i, j) {
                warnings.push(format!("line {line}: duplicate edge {src}->{dst} collapsed"));
            } else {
                graph.set_edge(i, j, true)?;
            }
        }
        Ok((graph, warnings))
    }
}

fn parse_label(field: &str, line: usize) -> Result<i64, IoError> {
    field.trim().parse().map_err(|_| IoError::Malformed {
        line,
        message: format!("node label {field:?} is not an integer"),
    })
}

/// Reads a `src,dst` edge list.
pub fn read_edges(path: &Path) -> Result<EdgeRecords, IoError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != ["src", "dst"] {
        return Err(IoError::BadHeader { expected: "src,dst".into(), found: found.join(",") });
    }
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(IoError::Malformed {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let src = parse_label(&record[0], line)?;
        let dst = parse_label(&record[1], line)?;
        pairs.push((src, dst, line));
    }
    Ok(EdgeRecords { pairs })
}

/// Convenience: edge list with the node universe inferred from the edges.
pub fn read_graph(path: &Path) -> Result<(Vec<i64>, DirectedGraph, Vec<String>), IoError> {
    let records = read_edges(path)?;
    let labels = records.labels();
    let (graph, warnings) = records.to_graph(&labels)?;
    Ok((labels, graph, warnings))
}

/// Node attribute table: one row per node, numeric columns.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributeTable {
    /// Ascending node labels; these define the node universe for a fit.
    pub labels: Vec<i64>,
    pub columns: Vec<String>,
    /// Row-major values, one row per label.
    pub values: Vec<Vec<f64>>,
}

impl AttributeTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Restricts the table to the given row indices, preserving order.
    pub fn select(&self, keep: &[usize]) -> AttributeTable {
        AttributeTable {
            labels: keep.iter().map(|&i| self.labels[i]).collect(),
            columns: self.columns.clone(),
            values: keep.iter().map(|&i| self.values[i].clone()).collect(),
        }
    }
}

/// Reads a `node,<attr>,...` table and sorts rows by label.
pub fn read_attributes(path: &Path) -> Result<AttributeTable, IoError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut names = headers.iter().map(str::trim);
    if names.next() != Some("node") {
        return Err(IoError::BadHeader {
            expected: "node,<attribute>,...".into(),
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }
    let columns: Vec<String> = names.map(String::from).collect();
    let mut rows: Vec<(i64, Vec<f64>)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != columns.len() + 1 {
            return Err(IoError::Malformed {
                line,
                message: format!("expected {} fields, found {}", columns.len() + 1, record.len()),
            });
        }
        let label = parse_label(&record[0], line)?;
        let mut values = Vec::with_capacity(columns.len());
        for (field, name) in record.iter().skip(1).zip(&columns) {
            let value: f64 = field.trim().parse().map_err(|_| IoError::Malformed {
                line,
                message: format!("attribute {name} value {field:?} is not numeric"),
            })?;
            values.push(value);
        }
        rows.push((label, values));
    }
    rows.sort_by_key(|&(label, _)| label);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(IoError::DuplicateNode { node: pair[0].0 });
        }
    }
    let (labels, values) = rows.into_iter().unzip();
    Ok(AttributeTable { labels, columns, values })
}

/// Whether an attribute is a code or a quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Categorical,
    Continuous,
}

/// How a node attribute becomes a dyadic covariate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRule {
    /// +1 when the two nodes agree, -1 otherwise.
    MatchSign,
    /// `|x_i - x_j|` in raw units.
    AbsDistance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaRule {
    pub attribute: String,
    pub kind: AttrKind,
    pub rule: PairRule,
}

fn validate_schema(rules: &[SchemaRule]) -> Result<(), IoError> {
    if rules.is_empty() {
        return Err(IoError::Schema { message: "no rules".into() });
    }
    for rule in rules {
        if rule.kind == AttrKind::Categorical && rule.rule == PairRule::AbsDistance {
            return Err(IoError::Schema {
                message: format!(
                    "attribute {}: distances between category codes are meaningless",
                    rule.attribute
                ),
            });
        }
    }
    for (a, rule) in rules.iter().enumerate() {
        if rules[..a].contains(rule) {
            return Err(IoError::Schema {
                message: format!("duplicate rule for attribute {}", rule.attribute),
            });
        }
    }
    Ok(())
}

/// Reads and validates a JSON array of schema rules.
pub fn read_schema(path: &Path) -> Result<Vec<SchemaRule>, IoError> {
    let rules: Vec<SchemaRule> = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    validate_schema(&rules)?;
    Ok(rules)
}

/// Applies schema rules to the attribute table, one covariate per rule.
pub fn build_covariates(
    attrs: &AttributeTable,
    rules: &[SchemaRule],
) -> Result<CovariateSet<f64>, IoError> {
    validate_schema(rules)?;
    let mut cols = Vec::with_capacity(rules.len());
    for rule in rules {
        cols.push(attrs.column(&rule.attribute).ok_or_else(|| IoError::Schema {
            message: format!(
                "attribute {} not in the table (available: {})",
                rule.attribute,
                attrs.columns.join(", ")
            ),
        })?);
    }
    let n = attrs.labels.len();
    Ok(CovariateSet::from_fn(n, rules.len(), |i, j| {
        rules
            .iter()
            .zip(&cols)
            .map(|(rule, &c)| {
                let (xi, xj) = (attrs.values[i][c], attrs.values[j][c]);
                match rule.rule {
                    PairRule::MatchSign => {
                        if xi == xj {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    PairRule::AbsDistance => (xi - xj).abs(),
                }
            })
            .collect()
    }))
}

/// Result of stripping uninformative nodes: the subgraph, the kept and
/// dropped indices into the input graph.
#[derive(Clone, Debug)]
pub struct Pruned {
    pub graph: DirectedGraph,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

/// Iteratively removes nodes with no outgoing or no incoming edges.
pub fn drop_degenerate_nodes(graph: &DirectedGraph) -> Result<Pruned, IoError> {
    let mut kept: Vec<usize> = (0..graph.n()).collect();
    let mut current = graph.clone();
    loop {
        let (d, b) = current.degree_sequences();
        let alive: Vec<usize> = (0..current.n()).filter(|&i| d[i] > 0 && b[i] > 0).collect();
        if alive.len() == current.n() {
            break;
        }
        if alive.is_empty() {
            return Err(IoError::AllNodesDropped);
        }
        current = current.subgraph(&alive)?;
        kept = alive.iter().map(|&i| kept[i]).collect();
    }
    let dropped: Vec<usize> = (0..graph.n()).filter(|i| !kept.contains(i)).collect();
    Ok(Pruned { graph: current, kept, dropped })
}

/// A loaded, pruned data set ready for release and fitting.
#[derive(Clone, Debug)]
pub struct Dataset {
    /// Labels of the kept nodes, ascending.
    pub labels: Vec<i64>,
    pub graph: DirectedGraph,
    pub covs: CovariateSet<f64>,
    /// Covariate names, one per schema rule.
    pub covariate_names: Vec<String>,
    pub warnings: Vec<String>,
    /// Labels removed for lacking outgoing or incoming edges.
    pub dropped_labels: Vec<i64>,
    /// Node count before pruning.
    pub n_input: usize,
}

/// Loads edges, attributes, and schema; joins them on the attribute
/// table's node universe; prunes uninformative nodes.
pub fn load_dataset(
    graph_path: &Path,
    attrs_path: &Path,
    schema_path: &Path,
) -> Result<Dataset, IoError> {
    let records = read_edges(graph_path)?;
    let attrs = read_attributes(attrs_path)?;
    let rules = read_schema(schema_path)?;
    let (graph, warnings) = records.to_graph(&attrs.labels)?;
    let pruned = drop_degenerate_nodes(&graph)?;
    let kept_attrs = attrs.select(&pruned.kept);
    let covs = build_covariates(&kept_attrs, &rules)?;
    Ok(Dataset {
        labels: kept_attrs.labels,
        graph: pruned.graph,
        covs,
        covariate_names: rules.iter().map(|r| r.attribute.clone()).collect(),
        warnings,
        dropped_labels: pruned.dropped.iter().map(|&i| attrs.labels[i]).collect(),
        n_input: attrs.labels.len(),
    })
}

/// Parses a whitespace-separated numeric table (the format Lazega mirrors
/// typically ship): one row per line, blank lines skipped.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, IoError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
        rows.push(row.map_err(|_| IoError::Malformed {
            line: idx + 1,
            message: "non-numeric entry in matrix row".into(),
        })?);
    }
    if rows.is_empty() {
        return Err(IoError::Malformed { line: 1, message: "empty matrix file".into() });
    }
    let width = rows[0].len();
    for (idx, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(IoError::Malformed {
                line: idx + 1,
                message: format!("row has {} entries, expected {width}", row.len()),
            });
        }
    }
    Ok(rows)
}

/// Converts a square 0/1 adjacency matrix into 1-based labeled edges.
pub fn adjacency_to_edges(rows: &[Vec<f64>]) -> Result<Vec<(i64, i64)>, IoError> {
    let n = rows.len();
    let mut edges = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(IoError::Malformed {
                line: i + 1,
                message: format!("adjacency is {n} rows but row has {} columns", row.len()),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 && v != 1.0 {
                return Err(IoError::Malformed {
                    line: i + 1,
                    message: format!("adjacency entry {v} is not 0 or 1"),
                });
            }
            if i == j && v != 0.0 {
                return Err(IoError::SelfLoop { line: i + 1, node: (i + 1) as i64 });
            }
            if v == 1.0 {
                edges.push(((i + 1) as i64, (j + 1) as i64));
            }
        }
    }
    Ok(edges)
}

pub fn write_edge_csv(path: &Path, edges: &[(i64, i64)]) -> Result<(), IoError> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "src,dst")?;
    for &(src, dst) in edges {
        writeln!(file, "{src},{dst}")?;
    }
    Ok(())
}

pub fn write_attribute_csv(path: &Path, attrs: &AttributeTable) -> Result<(), IoError> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "node,{}", attrs.columns.join(","))?;
    for (label, row) in attrs.labels.iter().zip(&attrs.values) {
        let fields: Vec<String> = row
            .iter()
            .map(|v| {
                if v.fract() == 0.0 {
                    format!("{}", *v as i64)
                } else {
                    format!("{v}")
                }
            })
            .collect();
        writeln!(file, "{label},{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_release(path: &Path) -> Result<DegreeRelease, IoError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_release(path: &Path, release: &DegreeRelease) -> Result<(), IoError> {
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, release)?;
    writeln!(file)?;
    Ok(())
}

/// One node's row in the fit report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub node: i64,
    pub d_tilde: i64,
    pub alpha: f64,
    pub se_alpha: f64,
    pub b_tilde: i64,
    pub beta: f64,
    pub se_beta: f64,
}

/// One covariate's row in the fit report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub name: String,
    pub estimate: f64,
    pub corrected: f64,
    pub se: f64,
    pub p_value: f64,
}

/// Privacy accounting and solver diagnostics attached to every fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub epsilon: Option<f64>,
    pub alpha_formula: String,
    pub alpha_n: Option<f64>,
    pub kappa_n: Option<f64>,
    pub s_n_sq: f64,
    pub v2n2n: Option<f64>,
    pub lambda_n: Option<f64>,
    pub residual_f: Option<f64>,
    pub residual_q: Option<f64>,
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub n_input: usize,
    pub n_used: usize,
    pub dropped_nodes: Vec<i64>,
    pub warnings: Vec<String>,
}

/// Full output of `fit`: per-node table, covariate table, diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub exists: bool,
    pub reason: Option<String>,
    pub nodes: Vec<NodeRow>,
    pub gamma: Vec<GammaRow>,
    pub diagnostics: Diagnostics,
}

pub fn write_fit_report(w: impl Write, report: &FitReport) -> Result<(), IoError> {
    let mut w = BufWriter::new(w);
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_fit_report(path: &Path) -> Result<FitReport, IoError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("dpdg_io_{}_{name}", std::process::id()));
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn edge_list_maps_labels_ascending() {
        let path = write_temp("edges.csv", "src,dst\n30,10\n10,20\n20,30\n30,20\n");
        let (labels, graph, warnings) = read_graph(&path).unwrap();
        assert_eq!(labels, vec![10, 20, 30]);
        assert!(warnings.is_empty());
        assert!(graph.has_edge(2, 0) && graph.has_edge(0, 1) && graph.has_edge(1, 2));
        assert!(graph.has_edge(2, 1));
        assert_eq!(graph.edge_count(), 4);
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn duplicate_edges_collapse_with_a_warning() {
        let path = write_temp("dup.csv", "src,dst\n1,2\n2,3\n1,2\n");
        let (_, graph, warnings) = read_graph(&path).unwrap();
        assert_eq!(graph.edge_count(), 2);
        assert_eq!(warnings, vec!["line 4: duplicate edge 1->2 collapsed"]);
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn self_loops_are_rejected_with_their_line() {
        let path = write_temp("loop.csv", "src,dst\n1,2\n3,3\n");
        match read_graph(&path) {
            Err(IoError::SelfLoop { line: 3, node: 3 }) => {}
            other => panic!("expected self-loop error, got {other:?}"),
        }
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn headers_and_labels_are_validated() {
        let path = write_temp("bad_header.csv", "from,to\n1,2\n");
        assert!(matches!(read_graph(&path), Err(IoError::BadHeader { .. })));
        std::fs::remove_file(path).unwrap();

        let path = write_temp("bad_label.csv", "src,dst\n1,x\n");
        match read_graph(&path) {
            Err(IoError::Malformed { line: 2, .. }) => {}
            other => panic!("expected malformed error, got {other:?}"),
        }
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn edges_outside_the_attribute_universe_are_errors() {
        let records = EdgeRecords { pairs: vec![(1, 2, 2), (1, 9, 3)] };
        match records.to_graph(&[1, 2, 3]) {
            Err(IoError::UnknownNode { line: 3, node: 9 }) => {}
            other => panic!("expected unknown node, got {other:?}"),
        }
    }

    #[test]
    fn attribute_table_round_trips_and_sorts() {
        let path = write_temp("attrs.csv", "node,age,office\n3,41,2\n1,35,1\n2,29,1\n");
        let attrs = read_attributes(&path).unwrap();
        assert_eq!(attrs.labels, vec![1, 2, 3]);
        assert_eq!(attrs.columns, vec!["age", "office"]);
        assert_eq!(attrs.values[0], vec![35.0, 1.0]);
        assert_eq!(attrs.values[2], vec![41.0, 2.0]);
        assert_eq!(attrs.column("office"), Some(1));
        std::fs::remove_file(path).unwrap();

        let dup = write_temp("attrs_dup.csv", "node,age\n1,35\n1,29\n");
        assert!(matches!(read_attributes(&dup), Err(IoError::DuplicateNode { node: 1 })));
        std::fs::remove_file(dup).unwrap();

        let head = write_temp("attrs_head.csv", "id,age\n1,35\n");
        assert!(matches!(read_attributes(&head), Err(IoError::BadHeader { .. })));
        std::fs::remove_file(head).unwrap();
    }

    #[test]
    fn schema_rules_build_the_documented_covariates() {
        let attrs = AttributeTable {
            labels: vec![1, 2, 3],
            columns: vec!["office".into(), "years".into()],
            values: vec![vec![1.0, 10.0], vec![1.0, 4.0], vec![2.0, 7.5]],
        };
        let rules = vec![
            SchemaRule { attribute: "office".into(), kind: AttrKind::Categorical, rule: PairRule::MatchSign },
            SchemaRule { attribute: "years".into(), kind: AttrKind::Continuous, rule: PairRule::AbsDistance },
        ];
        let covs = build_covariates(&attrs, &rules).unwrap();
        assert_eq!(covs.pair(0, 1), &[1.0, 6.0]);
        assert_eq!(covs.pair(0, 2), &[-1.0, 2.5]);
        assert_eq!(covs.pair(2, 1), &[-1.0, 3.5]);
    }

    #[test]
    fn schema_violations_are_rejected() {
        let distance_on_codes = vec![SchemaRule {
            attribute: "office".into(),
            kind: AttrKind::Categorical,
            rule: PairRule::AbsDistance,
        }];
        let attrs = AttributeTable {
            labels: vec![1, 2, 3],
            columns: vec!["office".into()],
            values: vec![vec![1.0], vec![2.0], vec![1.0]],
        };
        assert!(matches!(
            build_covariates(&attrs, &distance_on_codes),
            Err(IoError::Schema { .. })
        ));

        let unknown = vec![SchemaRule {
            attribute: "height".into(),
            kind: AttrKind::Continuous,
            rule: PairRule::AbsDistance,
        }];
        assert!(matches!(build_covariates(&attrs, &unknown), Err(IoError::Schema { .. })));

        let path = write_temp(
            "schema.json",
            r#"[{"attribute":"office","kind":"categorical","rule":"match_sign"}]"#,
        );
        let rules = read_schema(&path).unwrap();
        assert_eq!(rules[0].rule, PairRule::MatchSign);
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn pruning_removes_uninformative_nodes_iteratively() {
        // 0 -> 1 -> 2 -> 0 cycle; 3 feeds 4 which feeds the cycle. Node 3
        // has no in-edges; once it goes, node 4 has none either.
        let graph = DirectedGraph::from_edges(
            5,
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 0)],
        )
        .unwrap();
        let pruned = drop_degenerate_nodes(&graph).unwrap();
        assert_eq!(pruned.kept, vec![0, 1, 2]);
        assert_eq!(pruned.dropped, vec![3, 4]);
        assert_eq!(pruned.graph.n(), 3);
        assert_eq!(pruned.graph.edge_count(), 3);

        let clean = drop_degenerate_nodes(&pruned.graph).unwrap();
        assert_eq!(clean.kept, vec![0, 1, 2]);
        assert!(clean.dropped.is_empty());

        let hopeless = DirectedGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(matches!(drop_degenerate_nodes(&hopeless), Err(IoError::AllNodesDropped)));
    }

    #[test]
    fn datasets_join_edges_attributes_and_schema() {
        let edges = write_temp("ds_edges.csv", "src,dst\n1,2\n2,3\n3,1\n4,1\n");
        let attrs = write_temp("ds_attrs.csv", "node,office\n1,1\n2,1\n3,2\n4,2\n");
        let schema = write_temp(
            "ds_schema.json",
            r#"[{"attribute":"office","kind":"categorical","rule":"match_sign"}]"#,
        );
        let ds = load_dataset(&edges, &attrs, &schema).unwrap();
        // Node 4 has no incoming edges and is dropped.
        assert_eq!(ds.labels, vec![1, 2, 3]);
        assert_eq!(ds.dropped_labels, vec![4]);
        assert_eq!(ds.n_input, 4);
        assert_eq!(ds.graph.edge_count(), 3);
        assert_eq!(ds.covs.pair(0, 1), &[1.0]);
        assert_eq!(ds.covs.pair(0, 2), &[-1.0]);
        assert_eq!(ds.covariate_names, vec!["office"]);
        for path in [edges, attrs, schema] {
            std::fs::remove_file(path).unwrap();
        }
    }

    #[test]
    fn matrix_conversion_produces_canonical_files() {
        let rows = parse_matrix("0 1 0\n0 0 1\n1 1 0\n").unwrap();
        let edges = adjacency_to_edges(&rows).unwrap();
        assert_eq!(edges, vec![(1, 2), (2, 3), (3, 1), (3, 2)]);

        assert!(matches!(
            adjacency_to_edges(&parse_matrix("0 1\n1 1\n").unwrap()),
            Err(IoError::SelfLoop { line: 2, node: 2 })
        ));
        assert!(parse_matrix("0 1\n0\n").is_err());
        assert!(matches!(
            adjacency_to_edges(&parse_matrix("0 2\n0 0\n").unwrap()),
            Err(IoError::Malformed { .. })
        ));

        let dir = std::env::temp_dir();
        let graph_path = dir.join(format!("dpdg_io_conv_g_{}.csv", std::process::id()));
        let attrs_path = dir.join(format!("dpdg_io_conv_a_{}.csv", std::process::id()));
        write_edge_csv(&graph_path, &edges).unwrap();
        let (labels, graph, _) = read_graph(&graph_path).unwrap();
        assert_eq!(labels, vec![1, 2, 3]);
        assert_eq!(graph.edge_count(), 4);

        let table = AttributeTable {
            labels: vec![1, 2, 3],
            columns: vec!["age".into(), "score".into()],
            values: vec![vec![40.0, 1.5], vec![33.0, 2.0], vec![29.0, 0.25]],
        };
        write_attribute_csv(&attrs_path, &table).unwrap();
        let back = read_attributes(&attrs_path).unwrap();
        assert_eq!(back, table);
        let text = std::fs::read_to_string(&attrs_path).unwrap();
        assert!(text.contains("1,40,1.5"));
        std::fs::remove_file(graph_path).unwrap();
        std::fs::remove_file(attrs_path).unwrap();
    }

    #[test]
    fn releases_and_fit_reports_round_trip_as_json() {
        let release = DegreeRelease {
            epsilon: Some(2.0),
            d_tilde: vec![3, -1, 4],
            b_tilde: vec![2, 2, 2],
            seed: 9,
        };
        let path = std::env::temp_dir().join(format!("dpdg_io_rel_{}.json", std::process::id()));
        write_release(&path, &release).unwrap();
        assert_eq!(read_release(&path).unwrap(), release);
        std::fs::remove_file(&path).unwrap();

        let report = FitReport {
            exists: true,
            reason: None,
            nodes: vec![NodeRow {
                node: 1,
                d_tilde: 5,
                alpha: -8.5,
                se_alpha: 0.55,
                b_tilde: 24,
                beta: 4.63,
                se_beta: 0.31,
            }],
            gamma: vec![GammaRow {
                name: "office".into(),
                estimate: 1.113,
                corrected: 1.114,
                se: 0.067,
                p_value: 0.0,
            }],
            diagnostics: Diagnostics {
                epsilon: Some(2.0),
                alpha_formula: "consistent".into(),
                alpha_n: Some((-1.0f64).exp()),
                kappa_n: Some(2.0),
                s_n_sq: 252.0,
                v2n2n: Some(0.94),
                lambda_n: Some(12.0),
                residual_f: Some(1e-9),
                residual_q: Some(1e-9),
                inner_iters: 40,
                outer_iters: 4,
                n_input: 71,
                n_used: 69,
                dropped_nodes: vec![6, 44],
                warnings: vec![],
            },
        };
        let path = std::env::temp_dir().join(format!("dpdg_io_fit_{}.json", std::process::id()));
        write_fit_report(File::create(&path).unwrap(), &report).unwrap();
        let back = read_fit_report(&path).unwrap();
        assert_eq!(back, report);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"d_tilde\": 5"));
        assert!(text.contains("\"dropped_nodes\""));
        std::fs::remove_file(&path).unwrap();
    }
}
