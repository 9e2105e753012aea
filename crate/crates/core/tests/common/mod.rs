//! Test-side oracles and instance generators. Nothing here calls the
//! analyses under test: label sets are bitmasks and reachability is a naive
//! fixed point, so agreement with the library is meaningful.

#![allow(dead_code)]

use archtaint::boundary::{BoundaryRole, System};
use archtaint::firewall::HostAddr;
use archtaint::{ArchitectureSpec, CryptoPair, Edge, Graph, Label, LabelAssignment, NodeId, TaintSpec};
use rand::rngs::StdRng;
use rand::Rng;

pub const LABEL_NAMES: [&str; 4] = ["a", "b", "c", "d"];

/// A graph over nodes `0..n` with bitmask label sets.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub taints: Vec<u8>,
    pub untaints: Vec<u8>,
}

pub fn node_name(i: usize) -> String {
    format!("n{i}")
}

pub fn label_set(mask: u8) -> archtaint::LabelSet {
    (0..LABEL_NAMES.len())
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| Label::new(LABEL_NAMES[b]).unwrap())
        .collect()
}

impl Instance {
    pub fn graph(&self) -> Graph {
        Graph::from_parts(
            (0..self.n).map(|i| NodeId::new(node_name(i)).unwrap()),
            self.edges
                .iter()
                .map(|&(u, v)| Edge::new(NodeId::new(node_name(u)).unwrap(), NodeId::new(node_name(v)).unwrap())),
        )
    }

    /// A total assignment; untaints are given as written and normalized by
    /// the library.
    pub fn labels(&self) -> LabelAssignment {
        (0..self.n)
            .map(|i| {
                (
                    NodeId::new(node_name(i)).unwrap(),
                    TaintSpec::new(label_set(self.taints[i]), label_set(self.untaints[i])),
                )
            })
            .collect::<LabelAssignment>()
            .totalize(&self.graph())
            .unwrap()
    }

    fn stored_taints(&self, i: usize) -> u8 {
        self.taints[i] | self.untaints[i]
    }

    fn effective(&self, i: usize) -> u8 {
        self.stored_taints(i) & !self.untaints[i]
    }

    pub fn with_edges(&self, edges: Vec<(usize, usize)>) -> Instance {
        Instance {
            edges,
            ..self.clone()
        }
    }
}

/// Reachability matrix by iterating `R := R ∪ R;E` to a fixed point.
pub fn oracle_reach(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(u, v) in edges {
        r[u][v] = true;
    }
    loop {
        let mut changed = false;
        for u in 0..n {
            for w in 0..n {
                if r[u][w] {
                    continue;
                }
                if (0..n).any(|v| r[u][v] && r[v][w]) {
                    r[u][w] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

/// Simple tainting over the closure, ignoring untaints.
pub fn oracle_simple(inst: &Instance) -> bool {
    let r = oracle_reach(inst.n, &inst.edges);
    (0..inst.n).all(|u| {
        (0..inst.n).all(|v| !r[u][v] || inst.taints[u] & !inst.taints[v] == 0)
    })
}

pub fn oracle_edge_ok(inst: &Instance, u: usize, v: usize) -> bool {
    inst.effective(u) & !inst.stored_taints(v) == 0
}

/// Full tainting with untaints, edge by edge.
pub fn oracle_full(inst: &Instance) -> bool {
    inst.edges.iter().all(|&(u, v)| oracle_edge_ok(inst, u, v))
}

pub fn all_edges(n: usize, self_loops: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v || self_loops {
                out.push((u, v));
            }
        }
    }
    out
}

pub fn subset<T: Clone>(items: &[T], mask: u64) -> Vec<T> {
    items
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, x)| x.clone())
        .collect()
}

/// Every 3-node instance without self-loops whose taints range over the
/// subsets of a two-label universe, untaints empty.
pub fn exhaustive_simple() -> impl Iterator<Item = Instance> {
    let pairs = all_edges(3, false);
    (0u64..1 << pairs.len()).flat_map(move |em| {
        let edges = subset(&pairs, em);
        (0u32..64).map(move |lm| Instance {
            n: 3,
            edges: edges.clone(),
            taints: (0..3).map(|i| ((lm >> (2 * i)) & 3) as u8).collect(),
            untaints: vec![0; 3],
        })
    })
}

/// As [`exhaustive_simple`], with untaints ranging over the subsets of each
/// node's taints.
pub fn exhaustive_full() -> impl Iterator<Item = Instance> {
    let specs: Vec<(u8, u8)> = (0u8..4)
        .flat_map(|x| (0u8..4).filter(move |y| y & !x == 0).map(move |y| (x, y)))
        .collect();
    assert_eq!(specs.len(), 9);
    let pairs = all_edges(3, false);
    (0u64..1 << pairs.len()).flat_map(move |em| {
        let edges = subset(&pairs, em);
        let specs = specs.clone();
        (0usize..729).map(move |mut k| {
            let mut taints = Vec::new();
            let mut untaints = Vec::new();
            for _ in 0..3 {
                let (x, y) = specs[k % 9];
                k /= 9;
                taints.push(x);
                untaints.push(y);
            }
            Instance {
                n: 3,
                edges: edges.clone(),
                taints,
                untaints,
            }
        })
    })
}

/// A random instance with up to `max_nodes` nodes over `labels` labels.
/// Untaints are arbitrary subsets, so they exercise normalization too.
pub fn random_instance(rng: &mut StdRng, max_nodes: usize, labels: u32, self_loops: bool) -> Instance {
    let n = rng.gen_range(1..=max_nodes);
    let density: f64 = rng.gen_range(0.1..0.6);
    let edges = all_edges(n, self_loops)
        .into_iter()
        .filter(|_| rng.gen_bool(density))
        .collect();
    let full = (1u8 << labels) - 1;
    let taints = (0..n).map(|_| rng.gen::<u8>() & full).collect();
    let untaints = (0..n)
        .map(|_| if rng.gen_bool(0.5) { rng.gen::<u8>() & full } else { 0 })
        .collect();
    Instance {
        n,
        edges,
        taints,
        untaints,
    }
}

/// A random instance whose edges are drawn only from oracle-permitted
/// pairs, so it satisfies full tainting by construction.
pub fn random_satisfied(rng: &mut StdRng, max_nodes: usize, labels: u32) -> Instance {
    loop {
        let base = random_instance(rng, max_nodes, labels, true);
        let permitted: Vec<_> = all_edges(base.n, true)
            .into_iter()
            .filter(|&(u, v)| oracle_edge_ok(&base, u, v))
            .filter(|_| rng.gen_bool(0.7))
            .collect();
        if !permitted.is_empty() {
            return base.with_edges(permitted);
        }
    }
}

/// A random instance violating full tainting on at least one edge.
pub fn random_violating(rng: &mut StdRng, max_nodes: usize, labels: u32) -> Instance {
    loop {
        let inst = random_instance(rng, max_nodes, labels, true);
        if !oracle_full(&inst) {
            return inst;
        }
    }
}

const NAME_POOL: [&str; 10] = [
    "Sensor", "Hub", "Cloud", "Enc-1", "Dec-1", "db.main", "api_v2", "Logger", "X", "node-9",
];

/// A random architecture document model exercising every DSL feature.
pub fn random_spec(rng: &mut StdRng) -> ArchitectureSpec {
    let mut spec = ArchitectureSpec::default();
    let n = rng.gen_range(0..=NAME_POOL.len());
    let nodes: Vec<NodeId> = NAME_POOL[..n].iter().map(|s| NodeId::new(*s).unwrap()).collect();
    for node in &nodes {
        spec.graph.add_node(node.clone());
        if rng.gen_bool(0.6) {
            let x = label_set(rng.gen::<u8>() & 0xf);
            let y = label_set(if rng.gen_bool(0.4) { rng.gen::<u8>() & 0xf } else { 0 });
            spec.labels.insert(node.clone(), TaintSpec::new(x, y));
        }
        if rng.gen_bool(0.3) {
            let host = if rng.gen_bool(0.7) {
                let a: [u8; 4] = rng.gen();
                let prefix = rng.gen_bool(0.3).then(|| rng.gen_range(0..=32));
                HostAddr::new(std::net::Ipv4Addr::from(a).into(), prefix).unwrap()
            } else {
                let a: u128 = rng.gen();
                let prefix = rng.gen_bool(0.3).then(|| rng.gen_range(0..=128));
                HostAddr::new(std::net::Ipv6Addr::from(a).into(), prefix).unwrap()
            };
            spec.hosts.insert(node.clone(), host);
        }
    }
    if n > 0 {
        for _ in 0..rng.gen_range(0..=2 * n) {
            let u = nodes[rng.gen_range(0..n)].clone();
            let v = nodes[rng.gen_range(0..n)].clone();
            spec.graph.add_edge(Edge::new(u, v));
        }
        let mut free: Vec<NodeId> = nodes.clone();
        for s in 0..rng.gen_range(0..=3) {
            let mut sys = System::new(format!("Sys{s}"));
            for _ in 0..rng.gen_range(0..=3) {
                if free.is_empty() {
                    break;
                }
                let node = free.swap_remove(rng.gen_range(0..free.len()));
                let role = [
                    BoundaryRole::Internal,
                    BoundaryRole::Passive,
                    BoundaryRole::Active,
                    BoundaryRole::Both,
                ][rng.gen_range(0..4)];
                sys.members.insert(node, role);
            }
            spec.layout.systems.push(sys);
        }
        if n >= 2 {
            for _ in 0..rng.gen_range(0..=2) {
                let i = rng.gen_range(0..n);
                let j = (i + rng.gen_range(1..n)) % n;
                spec.pairs.push(CryptoPair {
                    enc: nodes[i].clone(),
                    dec: nodes[j].clone(),
                    labels: label_set(rng.gen_range(1..16)),
                });
            }
        }
    }
    spec
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
