use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;

use super::addr::HostAddr;
use super::eval::{Assertion, Verdict};
use super::rule::{Chain, FwRule, Ruleset, Target};
use super::FwError;
use crate::arch::ArchitectureSpec;
use crate::graph::NodeId;

/// Names the machine a ruleset is generated for: an address, a node with a
/// `host=` attribute, or a system whose addressed members share one host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HostSelector {
    Addr(HostAddr),
    Name(String),
}

impl FromStr for HostSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<HostAddr>() {
            Ok(a) => HostSelector::Addr(a),
            Err(_) => HostSelector::Name(s.to_string()),
        })
    }
}

impl fmt::Display for HostSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HostSelector::Addr(a) => write!(f, "{a}"),
            HostSelector::Name(n) => f.write_str(n),
        }
    }
}

impl From<HostAddr> for HostSelector {
    fn from(a: HostAddr) -> Self {
        HostSelector::Addr(a)
    }
}

pub fn resolve_host(spec: &ArchitectureSpec, host: &HostSelector) -> Result<HostAddr, FwError> {
    let name = match host {
        HostSelector::Addr(a) => return Ok(*a),
        HostSelector::Name(n) => n,
    };
    if let Some(a) = NodeId::new(name.as_str()).ok().and_then(|n| spec.hosts.get(&n)) {
        return Ok(*a);
    }
    let system = spec
        .layout
        .system(name)
        .ok_or_else(|| FwError::NoAddress(name.clone()))?;
    let addrs: IndexSet<HostAddr> = system
        .members
        .keys()
        .filter_map(|n| spec.hosts.get(n).copied())
        .collect();
    match addrs.len() {
        0 => Err(FwError::NoAddress(name.clone())),
        1 => Ok(addrs[0]),
        _ => Err(FwError::AmbiguousHost(name.clone())),
    }
}

/// Model edges between two distinct addresses, as address pairs in edge
/// declaration order.
fn host_flows(spec: &ArchitectureSpec) -> IndexSet<(HostAddr, HostAddr)> {
    spec.graph
        .edges()
        .iter()
        .filter_map(|e| Some((*spec.hosts.get(&e.src)?, *spec.hosts.get(&e.dst)?)))
        .filter(|(a, b)| a != b)
        .collect()
}

/// A default-deny stateful ruleset for one host. Each inter-host model edge
/// touching the host admits the connection in its direction and the
/// ESTABLISHED replies back. The model is not re-checked here.
pub fn generate_ruleset(spec: &ArchitectureSpec, host: &HostSelector) -> Result<Ruleset, FwError> {
    let h = resolve_host(spec, host)?;
    let mut rules: IndexSet<FwRule> = IndexSet::new();
    for (a, b) in host_flows(spec) {
        if a == h {
            rules.insert(FwRule::new(Chain::Output, Target::Accept).src(h).dst(b));
            rules.insert(FwRule::new(Chain::Input, Target::Accept).established().src(b).dst(h));
        } else if b == h {
            rules.insert(FwRule::new(Chain::Input, Target::Accept).src(a).dst(h));
            rules.insert(FwRule::new(Chain::Output, Target::Accept).established().src(h).dst(a));
        }
    }
    let mut rs = Ruleset::deny_all().installed_on(h);
    rs.rules = rules.into_iter().collect();
    Ok(rs)
}

/// Expected reachability for `host`: every ordered pair of distinct spec
/// addresses of the host's family with the host at one end, allowed iff a
/// model edge connects them in that direction.
pub fn conformance_assertions(
    spec: &ArchitectureSpec,
    host: &HostSelector,
) -> Result<Vec<Assertion>, FwError> {
    let h = resolve_host(spec, host)?;
    let flows = host_flows(spec);
    let addrs: IndexSet<HostAddr> = spec
        .hosts
        .values()
        .copied()
        .chain([h])
        .filter(|a| a.is_v6() == h.is_v6())
        .collect();
    let mut out = Vec::new();
    for &a in &addrs {
        for &b in &addrs {
            if a == b || (a != h && b != h) {
                continue;
            }
            let expect = if flows.contains(&(a, b)) {
                Verdict::Allowed
            } else {
                Verdict::Denied
            };
            out.push(Assertion {
                src: a,
                dst: b,
                proto: None,
                dport: None,
                expect,
            });
        }
    }
    Ok(out)
}
