//! Bell-LaPadula invariants and the projection of taint labels onto
//! security clearances.
//!
//! Projecting a single label `a` turns a [`TaintSpec`] `X - Y` into a BLP
//! attribute: confidential if `a ∈ X \ Y`, unclassified otherwise, and
//! trusted if `a ∈ Y`. The full tainting invariant holds exactly when the
//! trusted BLP invariant holds for the projection of every label, which
//! [`verify_equivalence`] checks on every call.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::taint::{check_tainting_full, Label, LabelAssignment, LabelSet, TaintSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlpError {
    #[error("no security clearance assigned to node `{0}`")]
    MissingClearance(String),
    #[error("no BLP attributes assigned to node `{0}`")]
    MissingAttribute(String),
    #[error(
        "internal inconsistency: tainting check gave {tainting} but per-label BLP check gave {blp}{}",
        label.as_ref().map(|l| format!(" (label `{l}`)")).unwrap_or_default()
    )]
    Inconsistent {
        tainting: bool,
        blp: bool,
        label: Option<Label>,
    },
}

/// A security clearance level. 0 is unclassified, 1 confidential, 2 secret.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clearance(pub u32);

impl Clearance {
    pub const UNCLASSIFIED: Clearance = Clearance(0);
    pub const CONFIDENTIAL: Clearance = Clearance(1);
    pub const SECRET: Clearance = Clearance(2);
}

impl fmt::Display for Clearance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("unclassified"),
            1 => f.write_str("confidential"),
            2 => f.write_str("secret"),
            3 => f.write_str("topsecret"),
            n => write!(f, "level-{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct BlpAttr {
    pub clearance: Clearance,
    pub trusted: bool,
}

impl fmt::Display for BlpAttr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trusted {
            write!(f, "{}, trusted", self.clearance)
        } else {
            write!(f, "{}", self.clearance)
        }
    }
}

/// Plain BLP: every edge flows to an equal or higher clearance.
pub fn check_blp(g: &Graph, sc: &HashMap<NodeId, Clearance>) -> Result<bool, BlpError> {
    let lookup = |n: &NodeId| {
        sc.get(n)
            .copied()
            .ok_or_else(|| BlpError::MissingClearance(n.to_string()))
    };
    for n in g.nodes() {
        lookup(n)?;
    }
    for e in g.edges() {
        if lookup(&e.src)? > lookup(&e.dst)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// BLP with trusted entities: a trusted receiver may accept any clearance
/// and redistributes at its own.
pub fn check_blp_trusted(g: &Graph, attrs: &HashMap<NodeId, BlpAttr>) -> Result<bool, BlpError> {
    let lookup = |n: &NodeId| {
        attrs
            .get(n)
            .copied()
            .ok_or_else(|| BlpError::MissingAttribute(n.to_string()))
    };
    for n in g.nodes() {
        lookup(n)?;
    }
    for e in g.edges() {
        let (src, dst) = (lookup(&e.src)?, lookup(&e.dst)?);
        if !(dst.trusted || src.clearance <= dst.clearance) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn project_label(a: &Label, s: &TaintSpec) -> BlpAttr {
    let trusted = s.untaints().contains(a);
    let clearance = if s.taints().contains(a) && !trusted {
        Clearance::CONFIDENTIAL
    } else {
        Clearance::UNCLASSIFIED
    };
    BlpAttr { clearance, trusted }
}

/// Generalized projection of a label set: the clearance level is the number
/// of labels of `a_set` present in `taints`.
pub fn project_label_set(a_set: &LabelSet, taints: &LabelSet) -> Clearance {
    Clearance(a_set.intersection(taints).count() as u32)
}

/// `project_label(a, ·) ∘ t` over the nodes of `g`.
pub fn projected_attrs(g: &Graph, t: &LabelAssignment, a: &Label) -> HashMap<NodeId, BlpAttr> {
    g.nodes()
        .iter()
        .map(|n| (n.clone(), project_label(a, t.get(n))))
        .collect()
}

/// Clearance part of the projection, for the simple model.
pub fn projected_clearances(
    g: &Graph,
    t: &LabelAssignment,
    a: &Label,
) -> HashMap<NodeId, Clearance> {
    g.nodes()
        .iter()
        .map(|n| (n.clone(), project_label(a, t.get(n)).clearance))
        .collect()
}

/// Checks the trusted BLP invariant for every label of the universe of `t`.
/// Returns the first label whose projection fails, if any.
pub fn first_failing_label(g: &Graph, t: &LabelAssignment) -> Result<Option<Label>, BlpError> {
    for a in t.label_universe() {
        if !check_blp_trusted(g, &projected_attrs(g, t, &a))? {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Returns the full tainting verdict after confirming that it agrees with
/// the per-label trusted BLP verdict.
pub fn verify_equivalence(g: &Graph, t: &LabelAssignment) -> Result<bool, BlpError> {
    let tainting = check_tainting_full(g, t);
    let failing = first_failing_label(g, t)?;
    let blp = failing.is_none();
    if tainting != blp {
        return Err(BlpError::Inconsistent {
            tainting,
            blp,
            label: failing,
        });
    }
    Ok(tainting)
}
