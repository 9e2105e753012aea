//! Taint labels and the tainting invariants.
//!
//! Every node carries a [`TaintSpec`] `X - Y`: the labels it taints `X`
//! and the labels it untaints `Y`, with `Y ⊆ X`. Data leaving a node carries
//! its effective taints `X \ Y`, and every receiver must taint at least
//! those labels. The edge-local form of the invariant is what the analyses
//! use; the closure form over reachability is kept for cross-checking.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::boundary::SystemLayout;
use crate::graph::{is_token, Edge, Graph, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaintError {
    #[error("label assignment mentions unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid label `{0}`: expected one or more of [A-Za-z0-9_.-]")]
    InvalidLabel(String),
}

/// A categorical taint label. Labels compare by exact name only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self, TaintError> {
        let name = name.into();
        if is_token(&name) {
            Ok(Label(name))
        } else {
            Err(TaintError::InvalidLabel(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for Label {
    type Err = TaintError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::new(s)
    }
}

pub type LabelSet = BTreeSet<Label>;

/// Formats a label set as `{a,b,c}`.
pub fn fmt_labels(set: &LabelSet) -> String {
    let inner: Vec<&str> = set.iter().map(Label::as_str).collect();
    format!("{{{}}}", inner.join(","))
}

/// The taints and untaints of one node, normalized so that untaints are a
/// subset of taints.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TaintSpec {
    taints: LabelSet,
    untaints: LabelSet,
}

impl TaintSpec {
    /// Normalizes `x - y` to `(x ∪ y) - y`.
    pub fn new(taints: LabelSet, untaints: LabelSet) -> Self {
        let mut taints = taints;
        taints.extend(untaints.iter().cloned());
        TaintSpec { taints, untaints }
    }

    /// A spec that taints `taints` and untaints nothing.
    pub fn tainting(taints: LabelSet) -> Self {
        TaintSpec::new(taints, LabelSet::new())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn taints(&self) -> &LabelSet {
        &self.taints
    }

    pub fn untaints(&self) -> &LabelSet {
        &self.untaints
    }

    /// `taints \ untaints`: the labels carried by outgoing data.
    pub fn effective_taints(&self) -> LabelSet {
        self.taints.difference(&self.untaints).cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.taints.is_empty()
    }
}

impl fmt::Display for TaintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", fmt_labels(&self.taints), fmt_labels(&self.untaints))
    }
}

static EMPTY_SPEC: TaintSpec = TaintSpec {
    taints: BTreeSet::new(),
    untaints: BTreeSet::new(),
};

/// A mapping from nodes to taint specifications, possibly partial.
///
/// Lookups of unmapped nodes yield the empty default `{}-{}`, which is the
/// value [`LabelAssignment::totalize`] fills in.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelAssignment {
    entries: IndexMap<NodeId, TaintSpec>,
    total: bool,
}

impl LabelAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: NodeId, spec: TaintSpec) -> Option<TaintSpec> {
        self.entries.insert(node, spec)
    }

    pub fn get(&self, node: &NodeId) -> &TaintSpec {
        self.entries.get(node).unwrap_or(&EMPTY_SPEC)
    }

    pub fn explicit(&self, node: &NodeId) -> Option<&TaintSpec> {
        self.entries.get(node)
    }

    pub fn entries(&self) -> &IndexMap<NodeId, TaintSpec> {
        &self.entries
    }

    pub fn is_total(&self) -> bool {
        self.total
    }

    /// Fills every node of `g` without an entry with `{}-{}`.
    pub fn totalize(&self, g: &Graph) -> Result<LabelAssignment, TaintError> {
        if let Some(stray) = self.entries.keys().find(|n| !g.contains_node(n)) {
            return Err(TaintError::UnknownNode(stray.to_string()));
        }
        let mut entries = self.entries.clone();
        for node in g.nodes() {
            entries.entry(node.clone()).or_default();
        }
        Ok(LabelAssignment {
            entries,
            total: true,
        })
    }

    /// Union of all taint sets.
    pub fn label_universe(&self) -> LabelSet {
        self.entries
            .values()
            .flat_map(|s| s.taints.iter().cloned())
            .collect()
    }
}

impl FromIterator<(NodeId, TaintSpec)> for LabelAssignment {
    fn from_iter<I: IntoIterator<Item = (NodeId, TaintSpec)>>(iter: I) -> Self {
        LabelAssignment {
            entries: iter.into_iter().collect(),
            total: false,
        }
    }
}

/// Simple tainting, closure form: every node reachable from `v` taints at
/// least the taints of `v`. Untaints are ignored.
pub fn check_tainting_closure(g: &Graph, t: &LabelAssignment) -> bool {
    g.nodes().iter().all(|v| {
        let own = t.get(v).taints();
        g.reachable_from(v)
            .map(|reach| reach.iter().all(|r| own.is_subset(t.get(r).taints())))
            .unwrap_or(true)
    })
}

/// Simple tainting, edge-local form. Untaints are ignored.
pub fn check_tainting_local(g: &Graph, t: &LabelAssignment) -> bool {
    g.edges()
        .iter()
        .all(|e| t.get(&e.src).taints().is_subset(t.get(&e.dst).taints()))
}

/// Whether data may flow along `src -> dst` under the full invariant.
pub fn flow_permitted(src: &TaintSpec, dst: &TaintSpec) -> bool {
    src.taints
        .difference(&src.untaints)
        .all(|a| dst.taints.contains(a))
}

/// Full tainting with untaints: `taints(v1) \ untaints(v1) ⊆ taints(v2)`
/// on every edge.
pub fn check_tainting_full(g: &Graph, t: &LabelAssignment) -> bool {
    g.edges()
        .iter()
        .all(|e| flow_permitted(t.get(&e.src), t.get(&e.dst)))
}

/// An edge violating the full invariant together with the labels that
/// leak across it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffendingFlow {
    pub edge: Edge,
    /// `effective_taints(src) \ taints(dst)`, never empty.
    pub witness: LabelSet,
}

impl fmt::Display for OffendingFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, witness {}", self.edge, fmt_labels(&self.witness))
    }
}

/// Every edge violating the full invariant, in edge declaration order.
pub fn offending_flows(g: &Graph, t: &LabelAssignment) -> Vec<OffendingFlow> {
    g.edges()
        .iter()
        .filter_map(|e| {
            let dst = t.get(&e.dst).taints();
            let witness: LabelSet = t
                .get(&e.src)
                .effective_taints()
                .into_iter()
                .filter(|a| !dst.contains(a))
                .collect();
            (!witness.is_empty()).then(|| OffendingFlow {
                edge: e.clone(),
                witness,
            })
        })
        .collect()
}

/// Removes all offending flows. The result is the largest subgraph of `g`
/// satisfying the full invariant.
pub fn repair(g: &Graph, t: &LabelAssignment) -> Graph {
    let offending: Vec<Edge> = offending_flows(g, t).into_iter().map(|f| f.edge).collect();
    g.remove_edges(&offending)
}

/// All flows between distinct nodes that the taint labels, and the system
/// boundaries if given, permit. Ordered by source then destination in node
/// declaration order.
pub fn synthesize_max_policy(
    nodes: &[NodeId],
    t: &LabelAssignment,
    layout: Option<&SystemLayout>,
) -> Graph {
    let mut g = Graph::from_parts(nodes.iter().cloned(), []);
    for u in nodes {
        for v in nodes {
            if u == v || !flow_permitted(t.get(u), t.get(v)) {
                continue;
            }
            if layout.is_some_and(|l| !l.edge_permitted(u, v)) {
                continue;
            }
            g.add_edge(Edge::new(u.clone(), v.clone()));
        }
    }
    g
}
