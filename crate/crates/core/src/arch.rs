//! The architecture description language.
//!
//! A document is line oriented; `#` starts a comment.
//!
//! ```text
//! node Building taints={energy}
//! node Anonymizer taints={energy} untaints={location} host=10.0.0.2
//! edge Building -> Anonymizer
//! system Home { Building:internal, Anonymizer:active }
//! cryptopair enc=Enc-A dec=Dec-A labels={A}
//! ```
//!
//! Declarations may appear in any order; references are resolved after the
//! whole document has been read.

use std::fmt::{self, Write as _};

use indexmap::IndexMap;
use thiserror::Error;

use crate::boundary::{BoundaryRole, System, SystemLayout};
use crate::firewall::HostAddr;
use crate::graph::{Edge, Graph, NodeId};
use crate::taint::{fmt_labels, Label, LabelAssignment, LabelSet, TaintError, TaintSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("system `{0}` declared twice")]
    DuplicateSystem(String),
    #[error("node `{node}` is already a member of system `{system}`")]
    Overlap { node: String, system: String },
    #[error("malformed label set: {0}")]
    MalformedLabelSet(String),
    #[error("invalid host address `{0}`")]
    InvalidAddress(String),
    #[error("crypto pair uses `{0}` as both encryption and decryption node")]
    SelfPair(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArchError {
    #[error(
        "node `{node}` declares {declared} but its crypto pair requires {expanded}"
    )]
    PairConflict {
        node: String,
        declared: String,
        expanded: String,
    },
    #[error(transparent)]
    Taint(#[from] TaintError),
}

/// A non-fatal remark produced while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// An encryption and decryption component sharing one label set. The
/// encryption node untaints every label, the decryption node taints them
/// again.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CryptoPair {
    pub enc: NodeId,
    pub dec: NodeId,
    pub labels: LabelSet,
}

impl CryptoPair {
    pub fn enc_spec(&self) -> TaintSpec {
        TaintSpec::new(self.labels.clone(), self.labels.clone())
    }

    pub fn dec_spec(&self) -> TaintSpec {
        TaintSpec::tainting(self.labels.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArchitectureSpec {
    pub graph: Graph,
    /// Explicit label declarations only; unlabeled nodes are absent.
    pub labels: LabelAssignment,
    pub layout: SystemLayout,
    pub hosts: IndexMap<NodeId, HostAddr>,
    pub pairs: Vec<CryptoPair>,
}

impl ArchitectureSpec {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_spec(text)
    }

    /// Replaces crypto pairs by the label declarations they stand for.
    pub fn expand_crypto_pairs(&self) -> Result<ArchitectureSpec, ArchError> {
        let mut out = self.clone();
        out.pairs.clear();
        for pair in &self.pairs {
            for (node, spec) in [(&pair.enc, pair.enc_spec()), (&pair.dec, pair.dec_spec())] {
                match out.labels.explicit(node) {
                    Some(existing) if existing != &spec => {
                        return Err(ArchError::PairConflict {
                            node: node.to_string(),
                            declared: existing.to_string(),
                            expanded: spec.to_string(),
                        });
                    }
                    Some(_) => {}
                    None => {
                        out.labels.insert(node.clone(), spec);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Labels after crypto-pair expansion, totalized with `{}-{}`.
    pub fn effective_labels(&self) -> Result<LabelAssignment, ArchError> {
        Ok(self.expand_crypto_pairs()?.labels.totalize(&self.graph)?)
    }

    pub fn host_of(&self, node: &NodeId) -> Option<&HostAddr> {
        self.hosts.get(node)
    }

    pub fn to_text(&self) -> String {
        serialize_spec(self)
    }
}

pub fn parse_spec(text: &str) -> Result<ArchitectureSpec, ParseError> {
    parse_spec_with_diagnostics(text).map(|(spec, _)| spec)
}

enum Stmt {
    Node {
        name: Spanned<NodeId>,
        taints: Option<LabelSet>,
        untaints: Option<LabelSet>,
        host: Option<HostAddr>,
    },
    Edge {
        src: Spanned<NodeId>,
        dst: Spanned<NodeId>,
    },
    System {
        name: Spanned<String>,
        members: Vec<(Spanned<NodeId>, BoundaryRole)>,
    },
    Pair {
        enc: Spanned<NodeId>,
        dec: Spanned<NodeId>,
        labels: LabelSet,
    },
}

struct Spanned<T> {
    value: T,
    column: usize,
}

pub fn parse_spec_with_diagnostics(
    text: &str,
) -> Result<(ArchitectureSpec, Vec<Diagnostic>), ParseError> {
    let mut stmts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut lp = LineParser {
            src: content,
            pos: 0,
            line: i + 1,
        };
        if let Some(stmt) = lp.statement()? {
            stmts.push((i + 1, stmt));
        }
    }

    let mut spec = ArchitectureSpec::default();
    let mut diagnostics = Vec::new();

    for (line, stmt) in &stmts {
        if let Stmt::Node {
            name,
            taints,
            untaints,
            host,
        } = stmt
        {
            if !spec.graph.add_node(name.value.clone()) {
                return Err(err(*line, name.column, ParseErrorKind::DuplicateNode(name.value.to_string())));
            }
            if taints.is_some() || untaints.is_some() {
                spec.labels.insert(
                    name.value.clone(),
                    TaintSpec::new(
                        taints.clone().unwrap_or_default(),
                        untaints.clone().unwrap_or_default(),
                    ),
                );
            }
            if let Some(h) = host {
                spec.hosts.insert(name.value.clone(), *h);
            }
        }
    }

    let known = |line: usize, n: &Spanned<NodeId>, g: &Graph| {
        if g.contains_node(&n.value) {
            Ok(())
        } else {
            Err(err(line, n.column, ParseErrorKind::UnknownNode(n.value.to_string())))
        }
    };
    let mut owner: IndexMap<NodeId, String> = IndexMap::new();
    for (line, stmt) in stmts {
        match stmt {
            Stmt::Node { .. } => {}
            Stmt::Edge { src, dst } => {
                known(line, &src, &spec.graph)?;
                known(line, &dst, &spec.graph)?;
                let edge = Edge::new(src.value, dst.value);
                if edge.is_self_loop() {
                    diagnostics.push(Diagnostic {
                        line,
                        message: format!("self-loop {edge}"),
                    });
                }
                if !spec.graph.add_edge(edge.clone()) {
                    diagnostics.push(Diagnostic {
                        line,
                        message: format!("duplicate edge {edge} ignored"),
                    });
                }
            }
            Stmt::System { name, members } => {
                if spec.layout.system(&name.value).is_some() {
                    return Err(err(line, name.column, ParseErrorKind::DuplicateSystem(name.value)));
                }
                let mut system = System::new(name.value.clone());
                for (member, role) in members {
                    known(line, &member, &spec.graph)?;
                    let taken = owner
                        .get(&member.value)
                        .cloned()
                        .or_else(|| system.members.contains_key(&member.value).then(|| name.value.clone()));
                    if let Some(system) = taken {
                        return Err(err(
                            line,
                            member.column,
                            ParseErrorKind::Overlap {
                                node: member.value.to_string(),
                                system,
                            },
                        ));
                    }
                    system.members.insert(member.value, role);
                }
                for node in system.members.keys() {
                    owner.insert(node.clone(), name.value.clone());
                }
                spec.layout.systems.push(system);
            }
            Stmt::Pair { enc, dec, labels } => {
                known(line, &enc, &spec.graph)?;
                known(line, &dec, &spec.graph)?;
                if enc.value == dec.value {
                    return Err(err(line, dec.column, ParseErrorKind::SelfPair(dec.value.to_string())));
                }
                spec.pairs.push(CryptoPair {
                    enc: enc.value,
                    dec: dec.value,
                    labels,
                });
            }
        }
    }
    Ok((spec, diagnostics))
}

fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

struct LineParser<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        self.error_at(self.pos, kind)
    }

    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        err(self.line, self.src[..pos].chars().count() + 1, kind)
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            let found = self.src[self.pos..].split_whitespace().next().unwrap_or("end of line");
            Err(self.error(ParseErrorKind::Syntax(format!("expected `{s}`, found `{found}`"))))
        }
    }

    /// A token of `[A-Za-z0-9_.-]`, stopping before `->`.
    fn token(&mut self, what: &str) -> Result<(&'a str, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() {
            let b = bytes[end];
            let ok = b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-');
            if !ok || (b == b'-' && bytes.get(end + 1) == Some(&b'>')) {
                break;
            }
            end += 1;
        }
        if end == start {
            let found = self.src[start..].split_whitespace().next().unwrap_or("end of line");
            return Err(self.error(ParseErrorKind::Syntax(format!("expected {what}, found `{found}`"))));
        }
        self.pos = end;
        Ok((&self.src[start..end], start))
    }

    fn column_of(&self, pos: usize) -> usize {
        self.src[..pos].chars().count() + 1
    }

    fn node(&mut self) -> Result<Spanned<NodeId>, ParseError> {
        let (name, start) = self.token("a node name")?;
        let value = NodeId::new(name).map_err(|_| {
            self.error_at(start, ParseErrorKind::Syntax(format!("invalid node name `{name}`")))
        })?;
        Ok(Spanned {
            value,
            column: self.column_of(start),
        })
    }

    fn label_set(&mut self) -> Result<LabelSet, ParseError> {
        self.skip_ws();
        let open = self.pos;
        if !self.eat("{") {
            return Err(self.error(ParseErrorKind::MalformedLabelSet("expected `{`".into())));
        }
        let mut set = LabelSet::new();
        if self.eat("}") {
            return Ok(set);
        }
        loop {
            let (name, start) = self.token("a label").map_err(|e| ParseError {
                kind: ParseErrorKind::MalformedLabelSet(e.kind.to_string()),
                ..e
            })?;
            let label = Label::new(name).map_err(|e| {
                self.error_at(start, ParseErrorKind::MalformedLabelSet(e.to_string()))
            })?;
            set.insert(label);
            if self.eat("}") {
                return Ok(set);
            }
            if !self.eat(",") {
                let _ = open;
                return Err(self.error(ParseErrorKind::MalformedLabelSet(
                    "expected `,` or `}`".into(),
                )));
            }
        }
    }

    fn statement(&mut self) -> Result<Option<Stmt>, ParseError> {
        if self.at_end() {
            return Ok(None);
        }
        let (keyword, kw_start) = self.token("a keyword")?;
        let stmt = match keyword {
            "node" => self.node_stmt()?,
            "edge" => {
                let src = self.node()?;
                self.expect("->")?;
                let dst = self.node()?;
                Stmt::Edge { src, dst }
            }
            "system" => self.system_stmt()?,
            "cryptopair" => {
                self.expect("enc")?;
                self.expect("=")?;
                let enc = self.node()?;
                self.expect("dec")?;
                self.expect("=")?;
                let dec = self.node()?;
                self.expect("labels")?;
                self.expect("=")?;
                let labels = self.label_set()?;
                Stmt::Pair { enc, dec, labels }
            }
            other => {
                return Err(self.error_at(
                    kw_start,
                    ParseErrorKind::Syntax(format!("unknown statement `{other}`")),
                ))
            }
        };
        if !self.at_end() {
            let rest = self.src[self.pos..].trim();
            return Err(self.error(ParseErrorKind::Syntax(format!("unexpected `{rest}`"))));
        }
        Ok(Some(stmt))
    }

    fn node_stmt(&mut self) -> Result<Stmt, ParseError> {
        let name = self.node()?;
        let mut taints = None;
        let mut untaints = None;
        let mut host = None;
        while !self.at_end() {
            let (attr, start) = self.token("an attribute")?;
            self.expect("=")?;
            let duplicate = || {
                self.error_at(start, ParseErrorKind::Syntax(format!("duplicate attribute `{attr}`")))
            };
            match attr {
                "taints" if taints.is_none() => taints = Some(self.label_set()?),
                "untaints" if untaints.is_none() => untaints = Some(self.label_set()?),
                "host" if host.is_none() => {
                    self.skip_ws();
                    let start = self.pos;
                    let rest = &self.src[start..];
                    let len = rest.find(char::is_whitespace).unwrap_or(rest.len());
                    let text = &rest[..len];
                    self.pos += len;
                    host = Some(text.parse::<HostAddr>().map_err(|_| {
                        self.error_at(start, ParseErrorKind::InvalidAddress(text.to_string()))
                    })?);
                }
                "taints" | "untaints" | "host" => return Err(duplicate()),
                other => {
                    return Err(self.error_at(
                        start,
                        ParseErrorKind::Syntax(format!("unknown attribute `{other}`")),
                    ))
                }
            }
        }
        Ok(Stmt::Node {
            name,
            taints,
            untaints,
            host,
        })
    }

    fn system_stmt(&mut self) -> Result<Stmt, ParseError> {
        let (name, start) = self.token("a system name")?;
        let name = Spanned {
            value: name.to_string(),
            column: self.column_of(start),
        };
        self.expect("{")?;
        let mut members = Vec::new();
        if self.peek() != Some('}') {
            loop {
                let member = self.node()?;
                self.expect(":")?;
                self.skip_ws();
                let role_start = self.pos;
                let (role, _) = self.token("a boundary role")?;
                let role = role.parse::<BoundaryRole>().map_err(|e| {
                    self.error_at(role_start, ParseErrorKind::Syntax(e.to_string()))
                })?;
                members.push((member, role));
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect("}")?;
        Ok(Stmt::System { name, members })
    }
}

/// Canonical text of `spec`: nodes, edges, systems, then crypto pairs, each
/// in declaration order.
pub fn serialize_spec(spec: &ArchitectureSpec) -> String {
    let mut out = String::new();
    for node in spec.graph.nodes() {
        let _ = write!(out, "node {node}");
        if let Some(ts) = spec.labels.explicit(node) {
            let _ = write!(out, " taints={}", fmt_labels(ts.taints()));
            if !ts.untaints().is_empty() {
                let _ = write!(out, " untaints={}", fmt_labels(ts.untaints()));
            }
        }
        if let Some(h) = spec.hosts.get(node) {
            let _ = write!(out, " host={h}");
        }
        out.push('\n');
    }
    for e in spec.graph.edges() {
        let _ = writeln!(out, "edge {} -> {}", e.src, e.dst);
    }
    for sys in &spec.layout.systems {
        let members: Vec<String> = sys
            .members
            .iter()
            .map(|(n, r)| format!("{n}:{r}"))
            .collect();
        if members.is_empty() {
            let _ = writeln!(out, "system {} {{}}", sys.name);
        } else {
            let _ = writeln!(out, "system {} {{ {} }}", sys.name, members.join(", "));
        }
    }
    for p in &spec.pairs {
        let _ = writeln!(
            out,
            "cryptopair enc={} dec={} labels={}",
            p.enc,
            p.dec,
            fmt_labels(&p.labels)
        );
    }
    out
}
