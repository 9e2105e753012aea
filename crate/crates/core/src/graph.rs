//! Directed policy graphs.
//!
//! A policy is a graph `(V, E)` of named components whose edges are the
//! permitted information flows. Nodes and edges keep their declaration
//! order so that every report derived from a graph is reproducible.

use std::collections::VecDeque;
use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid name `{0}`: expected one or more of [A-Za-z0-9_.-]")]
    InvalidName(String),
}

/// Returns true if `s` is a valid node or label token.
pub(crate) fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
}

/// Name of a component in a policy graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(name: impl Into<String>) -> Result<Self, GraphError> {
        let name = name.into();
        if is_token(&name) {
            Ok(NodeId(name))
        } else {
            Err(GraphError::InvalidName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for NodeId {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeId::new(s)
    }
}

/// A directed flow from `src` to `dst`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
}

impl Edge {
    pub fn new(src: NodeId, dst: NodeId) -> Self {
        Edge { src, dst }
    }

    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.src, self.dst)
    }
}

/// A policy graph.
///
/// Construction does not enforce well-formedness; use
/// [`Graph::is_well_formed`] to check that every edge endpoint is a node.
/// Parsed architecture documents are always well-formed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    nodes: IndexSet<NodeId>,
    edges: IndexSet<Edge>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from nodes and edges. Duplicates collapse to their
    /// first occurrence.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Self {
        Graph {
            nodes: nodes.into_iter().collect(),
            edges: edges.into_iter().collect(),
        }
    }

    /// Adds a node, returning false if it was already present.
    pub fn add_node(&mut self, node: NodeId) -> bool {
        self.nodes.insert(node)
    }

    /// Adds an edge, returning false if it was already present.
    pub fn add_edge(&mut self, edge: Edge) -> bool {
        self.edges.insert(edge)
    }

    pub fn nodes(&self) -> &IndexSet<NodeId> {
        &self.nodes
    }

    pub fn edges(&self) -> &IndexSet<Edge> {
        &self.edges
    }

    pub fn contains_node(&self, node: &NodeId) -> bool {
        self.nodes.contains(node)
    }

    pub fn contains_edge(&self, edge: &Edge) -> bool {
        self.edges.contains(edge)
    }

    pub fn is_well_formed(&self) -> bool {
        self.edges
            .iter()
            .all(|e| self.nodes.contains(&e.src) && self.nodes.contains(&e.dst))
    }

    /// All nodes `r` with `(v, r)` in the transitive closure of the edge
    /// relation, in node declaration order. `v` itself is included only if
    /// it lies on a cycle.
    pub fn reachable_from(&self, v: &NodeId) -> Result<IndexSet<NodeId>, GraphError> {
        let start = self
            .nodes
            .get_index_of(v)
            .ok_or_else(|| GraphError::UnknownNode(v.to_string()))?;
        let adjacency = self.adjacency();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: VecDeque<usize> = adjacency[start].iter().copied().collect();
        while let Some(i) = queue.pop_front() {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            queue.extend(adjacency[i].iter().copied().filter(|&j| !seen[j]));
        }
        Ok(self
            .nodes
            .iter()
            .zip(seen)
            .filter(|&(_, s)| s)
            .map(|(n, _)| n.clone())
            .collect())
    }

    /// Successor indices per node index. Edges with undeclared endpoints
    /// are skipped.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if let (Some(s), Some(d)) = (
                self.nodes.get_index_of(&e.src),
                self.nodes.get_index_of(&e.dst),
            ) {
                adj[s].push(d);
            }
        }
        adj
    }

    /// A copy of this graph without the given edges. Absent edges are
    /// ignored.
    pub fn remove_edges<'a>(&self, remove: impl IntoIterator<Item = &'a Edge>) -> Graph {
        let remove: IndexSet<&Edge> = remove.into_iter().collect();
        Graph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .filter(|e| !remove.contains(e))
                .cloned()
                .collect(),
        }
    }

    /// A copy of this graph keeping only the edges accepted by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(&Edge) -> bool) -> Graph {
        Graph {
            nodes: self.nodes.clone(),
            edges: self.edges.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    pub fn self_loops(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.is_self_loop())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn n(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    pub(crate) fn e(a: &str, b: &str) -> Edge {
        Edge::new(n(a), n(b))
    }

    pub(crate) fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> Graph {
        Graph::from_parts(
            nodes.iter().map(|s| n(s)),
            edges.iter().map(|(a, b)| e(a, b)),
        )
    }

    fn names(set: &IndexSet<NodeId>) -> Vec<&str> {
        set.iter().map(NodeId::as_str).collect()
    }

    #[test]
    fn well_formedness() {
        assert!(graph(&["A", "B"], &[("A", "B")]).is_well_formed());
        assert!(!graph(&["A"], &[("A", "B")]).is_well_formed());
        assert!(graph(&[], &[]).is_well_formed());
    }

    #[test]
    fn reachability_examples() {
        let g = graph(&["A", "B", "C"], &[("A", "B"), ("B", "C")]);
        assert_eq!(names(&g.reachable_from(&n("A")).unwrap()), ["B", "C"]);
        let g = graph(&["A", "B"], &[("A", "B"), ("B", "A")]);
        assert_eq!(names(&g.reachable_from(&n("A")).unwrap()), ["A", "B"]);

        let smart_home = graph(
            &["Building", "Smartphone", "SmartHomeBox", "Anonymizer", "Cloud"],
            &[
                ("Building", "SmartHomeBox"),
                ("Smartphone", "SmartHomeBox"),
                ("SmartHomeBox", "Anonymizer"),
                ("Anonymizer", "Cloud"),
            ],
        );
        assert_eq!(
            names(&smart_home.reachable_from(&n("Building")).unwrap()),
            ["SmartHomeBox", "Anonymizer", "Cloud"]
        );
        assert!(smart_home.reachable_from(&n("Cloud")).unwrap().is_empty());
    }

    #[test]
    fn reachability_unknown_node() {
        let g = graph(&["A"], &[]);
        assert_eq!(
            g.reachable_from(&n("Z")),
            Err(GraphError::UnknownNode("Z".into()))
        );
    }

    #[test]
    fn remove_edges_examples() {
        let g = graph(&["A", "B"], &[("A", "B")]);
        assert!(g.remove_edges(&[e("A", "B")]).edges().is_empty());
        assert_eq!(g.remove_edges(&[]), g);

        let g = graph(&["A", "B", "C"], &[("A", "B"), ("B", "C")]);
        let r = g.remove_edges(&[e("B", "C"), e("C", "A")]);
        assert_eq!(r.edges().iter().cloned().collect::<Vec<_>>(), [e("A", "B")]);
        assert_eq!(r.nodes(), g.nodes());
    }

    #[test]
    fn duplicates_collapse() {
        let g = graph(&["A", "A", "B"], &[("A", "B"), ("A", "B")]);
        assert_eq!(g.nodes().len(), 2);
        assert_eq!(g.edges().len(), 1);
    }

    #[test]
    fn self_loops_are_listed() {
        let g = graph(&["A", "B"], &[("A", "A"), ("A", "B")]);
        assert_eq!(g.self_loops().cloned().collect::<Vec<_>>(), [e("A", "A")]);
    }

    #[test]
    fn names_are_validated() {
        assert!(NodeId::new("Dec-A").is_ok());
        assert!(NodeId::new("").is_err());
        assert!(NodeId::new("a b").is_err());
        assert!(NodeId::new("a->b").is_err());
    }
}
