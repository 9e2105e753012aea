//! Findings, per-label views, criticality metrics and DOT export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use indexmap::IndexMap;
use thiserror::Error;

use crate::arch::{ArchError, ArchitectureSpec};
use crate::blp::{project_label, verify_equivalence, BlpAttr, BlpError, Clearance};
use crate::boundary::{check_boundaries, BoundaryError, BoundaryKind};
use crate::graph::{Edge, Graph, NodeId};
use crate::taint::{fmt_labels, offending_flows, Label, LabelAssignment, LabelSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Blp(#[from] BlpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FindingKind {
    TaintViolation,
    AcViolation,
    IfsViolation,
    Lint,
}

impl FindingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::TaintViolation => "taint-violation",
            FindingKind::AcViolation => "ac-violation",
            FindingKind::IfsViolation => "ifs-violation",
            FindingKind::Lint => "lint",
        }
    }

    /// Lints are advisory and do not count as violations.
    pub fn is_violation(self) -> bool {
        self != FindingKind::Lint
    }
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subject {
    Edge(Edge),
    Node(NodeId),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Edge(e) => write!(f, "{e}"),
            Subject::Node(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Labels(LabelSet),
    Text(String),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Labels(l) => f.write_str(&fmt_labels(l)),
            Witness::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub kind: FindingKind,
    pub subject: Subject,
    pub witness: Witness,
}

impl Finding {
    pub fn edge(&self) -> Option<&Edge> {
        match &self.subject {
            Subject::Edge(e) => Some(e),
            Subject::Node(_) => None,
        }
    }

    /// `kind \t src \t dst \t witness`; node findings leave `dst` empty.
    pub fn to_tsv(&self) -> String {
        let (src, dst) = match &self.subject {
            Subject::Edge(e) => (e.src.as_str(), e.dst.as_str()),
            Subject::Node(n) => (n.as_str(), ""),
        };
        format!("{}\t{}\t{}\t{}", self.kind, src, dst, self.witness)
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            Witness::Labels(_) => write!(f, "{}: {}, witness {}", self.kind, self.subject, self.witness),
            Witness::Text(_) => write!(f, "{}: {} ({})", self.kind, self.subject, self.witness),
        }
    }
}

/// Result of checking a spec: totalized labels and every finding.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub labels: LabelAssignment,
    pub findings: Vec<Finding>,
}

impl Analysis {
    pub fn violations(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.kind.is_violation())
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }

    pub fn is_clean(&self) -> bool {
        self.violation_count() == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.findings {
            let _ = writeln!(out, "{f}");
        }
        let _ = writeln!(out, "{} violations", self.violation_count());
        out
    }

    pub fn to_tsv(&self) -> String {
        self.findings.iter().map(|f| f.to_tsv() + "\n").collect()
    }
}

/// Expands crypto pairs, totalizes the labels and runs the taint, boundary
/// and lint checks. The taint verdict is cross-checked against the
/// per-label Bell-LaPadula verdict; a disagreement is an error.
pub fn analyze(spec: &ArchitectureSpec) -> Result<Analysis, ReportError> {
    let labels = spec.effective_labels()?;
    let g = &spec.graph;
    let mut findings = Vec::new();

    for flow in offending_flows(g, &labels) {
        findings.push(Finding {
            kind: FindingKind::TaintViolation,
            subject: Subject::Edge(flow.edge),
            witness: Witness::Labels(flow.witness),
        });
    }
    for v in check_boundaries(g, &spec.layout)? {
        let (kind, text) = match v.kind {
            BoundaryKind::AccessControl => (
                FindingKind::AcViolation,
                format!("{} accepts no connections from outside its system", v.edge.dst),
            ),
            BoundaryKind::InformationFlow => (
                FindingKind::IfsViolation,
                format!("{} sends nothing outside its system", v.edge.src),
            ),
        };
        findings.push(Finding {
            kind,
            subject: Subject::Edge(v.edge),
            witness: Witness::Text(text),
        });
    }
    for e in g.self_loops() {
        findings.push(Finding {
            kind: FindingKind::Lint,
            subject: Subject::Edge(e.clone()),
            witness: Witness::Text("self-loop".into()),
        });
    }

    let passes = verify_equivalence(g, &labels)?;
    debug_assert_eq!(passes, !findings.iter().any(|f| f.kind == FindingKind::TaintViolation));
    Ok(Analysis { labels, findings })
}

/// What one data subject's label reveals about an architecture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserView {
    pub label: Label,
    /// Whether the label occurs anywhere in the architecture.
    pub known: bool,
    pub graph: Graph,
    pub annotations: IndexMap<NodeId, BlpAttr>,
}

impl UserView {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in self.graph.nodes() {
            let attr = &self.annotations[n];
            let status = match (attr.clearance, attr.trusted) {
                (_, true) => "trusted",
                (c, false) if c == Clearance::UNCLASSIFIED => "unclassified",
                _ => "confidential",
            };
            let _ = writeln!(out, "node {n} {status}");
        }
        for e in self.graph.edges() {
            let _ = writeln!(out, "edge {e}");
        }
        out
    }
}

/// Nodes that may hold `a`, and the edges along which `a` actually flows.
/// Edges into nodes outside the view only occur in violating specs and are
/// left out.
pub fn user_view(spec: &ArchitectureSpec, a: &Label) -> Result<UserView, ReportError> {
    let labels = spec.effective_labels()?;
    let known = labels.label_universe().contains(a);
    let mut graph = Graph::new();
    let mut annotations = IndexMap::new();
    for n in spec.graph.nodes() {
        let s = labels.get(n);
        if s.taints().contains(a) {
            graph.add_node(n.clone());
            annotations.insert(n.clone(), project_label(a, s));
        }
    }
    for e in spec.graph.edges() {
        let carries = labels.get(&e.src).effective_taints().contains(a);
        if carries && graph.contains_node(&e.src) && graph.contains_node(&e.dst) {
            graph.add_edge(e.clone());
        }
    }
    Ok(UserView {
        label: a.clone(),
        known,
        graph,
        annotations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeMetrics {
    pub taint_count: usize,
    /// Nonempty untaints: the node claims to remove data.
    pub is_pet: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    pub nodes: BTreeMap<NodeId, NodeMetrics>,
    /// Number of nodes holding each label.
    pub exposure: BTreeMap<Label, usize>,
    /// Nodes whose outgoing data combines at least two labels.
    pub hotspots: BTreeSet<NodeId>,
}

impl Metrics {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# node\ttaint-count\tpet");
        for (n, m) in &self.nodes {
            let _ = writeln!(out, "{n}\t{}\t{}", m.taint_count, if m.is_pet { "yes" } else { "no" });
        }
        let _ = writeln!(out, "# label\texposure");
        for (l, c) in &self.exposure {
            let _ = writeln!(out, "{l}\t{c}");
        }
        let hot: Vec<&str> = self.hotspots.iter().map(NodeId::as_str).collect();
        let _ = writeln!(out, "# linkability hotspots: {}", hot.join(", "));
        if self.nodes.values().any(|m| m.is_pet) {
            let _ = writeln!(
                out,
                "# pet components are trusted to untaint correctly; that is not checked"
            );
        }
        out
    }
}

pub fn criticality_metrics(spec: &ArchitectureSpec) -> Result<Metrics, ReportError> {
    let labels = spec.effective_labels()?;
    let mut m = Metrics::default();
    for n in spec.graph.nodes() {
        let s = labels.get(n);
        m.nodes.insert(
            n.clone(),
            NodeMetrics {
                taint_count: s.taints().len(),
                is_pet: !s.untaints().is_empty(),
            },
        );
        for a in s.taints() {
            *m.exposure.entry(a.clone()).or_default() += 1;
        }
        if s.effective_taints().len() >= 2 {
            m.hotspots.insert(n.clone());
        }
    }
    Ok(m)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering: one cluster per system, nodes labeled with their
/// taint specification, and every edge with a finding drawn red with the
/// finding's witness as its label.
pub fn export_dot(spec: &ArchitectureSpec, findings: &[Finding]) -> String {
    let labels = spec
        .expand_crypto_pairs()
        .map(|s| s.labels)
        .unwrap_or_else(|_| spec.labels.clone());
    let mut flagged: IndexMap<&Edge, Vec<String>> = IndexMap::new();
    for f in findings {
        if let Some(e) = f.edge() {
            flagged.entry(e).or_default().push(f.witness.to_string());
        }
    }

    let node_line = |out: &mut String, indent: &str, n: &NodeId| {
        let label = format!("{n}\n{}", labels.get(n));
        let _ = writeln!(out, "{indent}{} [label={}];", quote(n.as_str()), quote(&label));
    };

    let mut out = String::from("digraph architecture {\n  node [shape=box];\n");
    for (i, sys) in spec.layout.systems.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{i} {{");
        let _ = writeln!(out, "    label={};", quote(&sys.name));
        let _ = writeln!(out, "    style=dotted;");
        for n in sys.members.keys() {
            node_line(&mut out, "    ", n);
        }
        out.push_str("  }\n");
    }
    for n in spec.graph.nodes() {
        if spec.layout.membership(n).is_none() {
            node_line(&mut out, "  ", n);
        }
    }
    for e in spec.graph.edges() {
        let _ = write!(out, "  {} -> {}", quote(e.src.as_str()), quote(e.dst.as_str()));
        match flagged.get(e) {
            Some(w) => {
                let _ = writeln!(out, " [color=red, label={}];", quote(&w.join("; ")));
            }
            None => out.push_str(";\n"),
        }
    }
    out.push_str("}\n");
    out
}
