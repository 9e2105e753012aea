//! Systems and their boundaries.
//!
//! Nodes may be grouped into systems. Each member has a role: internal
//! members are invisible from outside their system, passive boundaries
//! accept incoming connections, active boundaries initiate outgoing ones,
//! and `both` does either. Nodes in no system belong to the world and are
//! unconstrained. A boundary layout compiles into two edge predicates, an
//! access-control one on the receiving side and an information-flow one on
//! the sending side, and both only apply to edges that cross systems.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use thiserror::Error;

use crate::graph::{Edge, Graph, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundaryError {
    #[error("node `{node}` is a member of both `{first}` and `{second}`")]
    Overlap {
        node: String,
        first: String,
        second: String,
    },
    #[error("system `{system}` lists unknown node `{node}`")]
    UnknownMember { system: String, node: String },
    #[error("system `{0}` is declared twice")]
    DuplicateSystem(String),
    #[error("unknown boundary role `{0}`")]
    UnknownRole(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryRole {
    Internal,
    Passive,
    Active,
    Both,
}

impl BoundaryRole {
    pub fn accepts_incoming(self) -> bool {
        matches!(self, BoundaryRole::Passive | BoundaryRole::Both)
    }

    pub fn initiates_outgoing(self) -> bool {
        matches!(self, BoundaryRole::Active | BoundaryRole::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryRole::Internal => "internal",
            BoundaryRole::Passive => "passive",
            BoundaryRole::Active => "active",
            BoundaryRole::Both => "both",
        }
    }
}

impl fmt::Display for BoundaryRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryRole {
    type Err = BoundaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "internal" => Ok(BoundaryRole::Internal),
            "passive" => Ok(BoundaryRole::Passive),
            "active" => Ok(BoundaryRole::Active),
            "both" => Ok(BoundaryRole::Both),
            other => Err(BoundaryError::UnknownRole(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub name: String,
    pub members: IndexMap<NodeId, BoundaryRole>,
}

impl System {
    pub fn new(name: impl Into<String>) -> Self {
        System {
            name: name.into(),
            members: IndexMap::new(),
        }
    }

    pub fn with_member(mut self, node: NodeId, role: BoundaryRole) -> Self {
        self.members.insert(node, role);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SystemLayout {
    pub systems: Vec<System>,
}

impl SystemLayout {
    pub fn new(systems: Vec<System>) -> Self {
        SystemLayout { systems }
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    /// Checks that systems are uniquely named, pairwise disjoint and only
    /// list nodes of `g`.
    pub fn validate(&self, g: &Graph) -> Result<(), BoundaryError> {
        let mut owner: IndexMap<&NodeId, &str> = IndexMap::new();
        for (i, sys) in self.systems.iter().enumerate() {
            if self.systems[..i].iter().any(|s| s.name == sys.name) {
                return Err(BoundaryError::DuplicateSystem(sys.name.clone()));
            }
            for node in sys.members.keys() {
                if !g.contains_node(node) {
                    return Err(BoundaryError::UnknownMember {
                        system: sys.name.clone(),
                        node: node.to_string(),
                    });
                }
                if let Some(first) = owner.insert(node, &sys.name) {
                    return Err(BoundaryError::Overlap {
                        node: node.to_string(),
                        first: first.to_string(),
                        second: sys.name.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The index of the system containing `node` and its role there.
    pub fn membership(&self, node: &NodeId) -> Option<(usize, BoundaryRole)> {
        self.systems
            .iter()
            .enumerate()
            .find_map(|(i, s)| s.members.get(node).map(|r| (i, *r)))
    }

    pub fn system(&self, name: &str) -> Option<&System> {
        self.systems.iter().find(|s| s.name == name)
    }

    /// Violations of an edge `src -> dst`, access control first.
    pub fn edge_violations(&self, src: &NodeId, dst: &NodeId) -> Vec<BoundaryKind> {
        let from = self.membership(src);
        let to = self.membership(dst);
        let same_system = matches!((from, to), (Some((a, _)), Some((b, _))) if a == b)
            || (from.is_none() && to.is_none());
        if same_system {
            return Vec::new();
        }
        let mut out = Vec::new();
        if let Some((_, role)) = to {
            if !role.accepts_incoming() {
                out.push(BoundaryKind::AccessControl);
            }
        }
        if let Some((_, role)) = from {
            if !role.initiates_outgoing() {
                out.push(BoundaryKind::InformationFlow);
            }
        }
        out
    }

    pub fn edge_permitted(&self, src: &NodeId, dst: &NodeId) -> bool {
        self.edge_violations(src, dst).is_empty()
    }
}

/// Which of the two boundary invariants an edge violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// The receiver is not reachable from outside its system.
    AccessControl,
    /// The sender may not leak to outside its system.
    InformationFlow,
}

impl BoundaryKind {
    pub fn short(self) -> &'static str {
        match self {
            BoundaryKind::AccessControl => "AC",
            BoundaryKind::InformationFlow => "IFS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryViolation {
    pub kind: BoundaryKind,
    pub edge: Edge,
}

impl fmt::Display for BoundaryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation: {}", self.kind.short(), self.edge)
    }
}

/// All boundary violations of `g`, in edge declaration order.
pub fn check_boundaries(
    g: &Graph,
    layout: &SystemLayout,
) -> Result<Vec<BoundaryViolation>, BoundaryError> {
    layout.validate(g)?;
    Ok(g.edges()
        .iter()
        .flat_map(|e| {
            layout
                .edge_violations(&e.src, &e.dst)
                .into_iter()
                .map(|kind| BoundaryViolation {
                    kind,
                    edge: e.clone(),
                })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{e, graph, n};
    use BoundaryRole::*;

    fn measrdroid_like() -> (Graph, SystemLayout) {
        let g = graph(
            &["Enc-A", "Upload", "UploadDroid", "Collector", "Dec-A", "World"],
            &[
                ("Enc-A", "Upload"),
                ("Upload", "UploadDroid"),
                ("Collector", "UploadDroid"),
                ("Collector", "Dec-A"),
            ],
        );
        let layout = SystemLayout::new(vec![
            System::new("Smartphone")
                .with_member(n("Enc-A"), Internal)
                .with_member(n("Upload"), Active),
            System::new("UploadDroid").with_member(n("UploadDroid"), Passive),
            System::new("CollectDroid")
                .with_member(n("Collector"), Active)
                .with_member(n("Dec-A"), Internal),
        ]);
        (g, layout)
    }

    #[test]
    fn model_without_violations() {
        let (g, layout) = measrdroid_like();
        assert_eq!(check_boundaries(&g, &layout), Ok(vec![]));
    }

    #[test]
    fn passive_boundary_may_not_send_out() {
        let (mut g, layout) = measrdroid_like();
        g.add_edge(e("UploadDroid", "World"));
        let v = check_boundaries(&g, &layout).unwrap();
        assert_eq!(
            v,
            [BoundaryViolation { kind: BoundaryKind::InformationFlow, edge: e("UploadDroid", "World") }]
        );
    }

    #[test]
    fn internal_node_unreachable_from_world() {
        let (mut g, layout) = measrdroid_like();
        g.add_edge(e("World", "Dec-A"));
        let v = check_boundaries(&g, &layout).unwrap();
        assert_eq!(
            v,
            [BoundaryViolation { kind: BoundaryKind::AccessControl, edge: e("World", "Dec-A") }]
        );
    }

    #[test]
    fn internal_to_internal_across_systems_violates_both() {
        let (mut g, layout) = measrdroid_like();
        g.add_edge(e("Enc-A", "Dec-A"));
        let kinds: Vec<_> = check_boundaries(&g, &layout)
            .unwrap()
            .into_iter()
            .map(|v| v.kind)
            .collect();
        assert_eq!(kinds, [BoundaryKind::AccessControl, BoundaryKind::InformationFlow]);
    }

    #[test]
    fn intra_system_edges_are_never_reported() {
        for a in [Internal, Passive, Active, Both] {
            for b in [Internal, Passive, Active, Both] {
                let g = graph(&["X", "Y"], &[("X", "Y"), ("Y", "X")]);
                let layout = SystemLayout::new(vec![System::new("S")
                    .with_member(n("X"), a)
                    .with_member(n("Y"), b)]);
                assert!(check_boundaries(&g, &layout).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn empty_layout_has_no_constraints() {
        let g = graph(&["A", "B"], &[("A", "B"), ("B", "A")]);
        assert!(check_boundaries(&g, &SystemLayout::default()).unwrap().is_empty());
    }

    #[test]
    fn validation_errors() {
        let g = graph(&["A"], &[]);
        let overlap = SystemLayout::new(vec![
            System::new("S").with_member(n("A"), Internal),
            System::new("T").with_member(n("A"), Active),
        ]);
        assert!(matches!(check_boundaries(&g, &overlap), Err(BoundaryError::Overlap { .. })));
        let unknown = SystemLayout::new(vec![System::new("S").with_member(n("Z"), Internal)]);
        assert!(matches!(
            check_boundaries(&g, &unknown),
            Err(BoundaryError::UnknownMember { .. })
        ));
        assert_eq!("sideways".parse::<BoundaryRole>(), Err(BoundaryError::UnknownRole("sideways".into())));
    }
}
