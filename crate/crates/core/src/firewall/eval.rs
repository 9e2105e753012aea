//! Connection reachability through a host-local ruleset.
//!
//! A connection from `src` to `dst` is allowed when the host accepts its
//! initiating (NEW) packet and the ESTABLISHED reply coming back. Only the
//! INPUT and OUTPUT chains of the installed-on host take part. Source and
//! destination may be address blocks; a verdict then holds for every
//! address in the block, which is established by splitting blocks wherever
//! a rule covers only part of them.

use std::fmt;
use std::str::FromStr;

use super::addr::{AddrRange, HostAddr, Overlap};
use super::rule::{Chain, FwRule, Policy, Proto, Ruleset, Target};
use super::FwError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Allowed,
    Denied,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Allowed => "allowed",
            Verdict::Denied => "denied",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = FwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "allowed" => Ok(Verdict::Allowed),
            "denied" => Ok(Verdict::Denied),
            other => Err(FwError::Syntax(format!(
                "expected `allowed` or `denied`, found `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    New,
    Reply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// A LOG rule matched; evaluation continued. Holds the 1-based rule
    /// number.
    Logged(usize),
    /// A terminal rule decided.
    Rule(usize, Target),
    /// No terminal rule matched.
    Policy(Policy),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub leg: Leg,
    pub chain: Chain,
    pub src: AddrRange,
    pub dst: AddrRange,
    pub outcome: StepOutcome,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let leg = match self.leg {
            Leg::New => "NEW",
            Leg::Reply => "ESTABLISHED",
        };
        write!(f, "{} {} {} -> {}: ", self.chain, leg, self.src, self.dst)?;
        match self.outcome {
            StepOutcome::Logged(n) => write!(f, "rule {n} LOG"),
            StepOutcome::Rule(n, t) => write!(f, "rule {n} {t}"),
            StepOutcome::Policy(p) => write!(f, "policy {p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub trace: Vec<TraceStep>,
}

impl Decision {
    pub fn allowed(&self) -> bool {
        self.verdict == Verdict::Allowed
    }

    pub fn trace_text(&self) -> String {
        self.trace
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Src,
    Dst,
}

struct Packet {
    src: AddrRange,
    dst: AddrRange,
    proto: Option<Proto>,
    sport: Option<u16>,
    dport: Option<u16>,
    established: bool,
    loopback: bool,
}

enum RuleMatch {
    Yes,
    No,
    Partial(Side),
}

fn addr_match(rule: Option<&HostAddr>, query: &AddrRange, side: Side) -> RuleMatch {
    match rule.map(|r| r.range().overlap(query)) {
        None | Some(Overlap::Full) => RuleMatch::Yes,
        Some(Overlap::None) => RuleMatch::No,
        Some(Overlap::Partial) => RuleMatch::Partial(side),
    }
}

fn iface_match(rule: Option<&String>, present: bool, loopback: bool) -> bool {
    match rule {
        None => true,
        // Any interface other than `lo` stands for the external one.
        Some(name) => present && (name == "lo") == loopback,
    }
}

fn port_match(rule: Option<&super::rule::PortRange>, port: Option<u16>) -> bool {
    match rule {
        None => true,
        Some(r) => port.is_some_and(|p| r.contains(p)),
    }
}

fn rule_match(rule: &FwRule, p: &Packet) -> RuleMatch {
    let scalar = rule.proto.is_none_or(|r| p.proto == Some(r))
        && port_match(rule.sport.as_ref(), p.sport)
        && port_match(rule.dport.as_ref(), p.dport)
        && (rule.state.is_none() || p.established)
        && iface_match(rule.in_if.as_ref(), rule.chain == Chain::Input, p.loopback)
        && iface_match(rule.out_if.as_ref(), rule.chain == Chain::Output, p.loopback);
    if !scalar {
        return RuleMatch::No;
    }
    match addr_match(rule.src.as_ref(), &p.src, Side::Src) {
        RuleMatch::Yes => addr_match(rule.dst.as_ref(), &p.dst, Side::Dst),
        other => other,
    }
}

enum ChainResult {
    Done(bool, Vec<TraceStep>),
    Split(Side),
}

fn eval_chain(rs: &Ruleset, chain: Chain, leg: Leg, p: &Packet) -> ChainResult {
    let mut steps = Vec::new();
    let step = |outcome| TraceStep {
        leg,
        chain,
        src: p.src,
        dst: p.dst,
        outcome,
    };
    for (i, rule) in rs.chain_rules(chain) {
        match rule_match(rule, p) {
            RuleMatch::No => {}
            RuleMatch::Partial(side) => return ChainResult::Split(side),
            RuleMatch::Yes => match rule.target {
                Target::Log => steps.push(step(StepOutcome::Logged(i + 1))),
                t => {
                    steps.push(step(StepOutcome::Rule(i + 1, t)));
                    return ChainResult::Done(t == Target::Accept, steps);
                }
            },
        }
    }
    let policy = rs.policy(chain);
    steps.push(step(StepOutcome::Policy(policy)));
    ChainResult::Done(policy.accepts(), steps)
}

enum Leaf {
    Decided(Decision),
    /// Neither endpoint is the host.
    Skip,
    Split(Side),
}

/// How much of `range` is the host itself.
fn host_relation(range: &AddrRange, host: &AddrRange) -> Overlap {
    host.overlap(range)
}

fn eval_leaf(
    rs: &Ruleset,
    host: &AddrRange,
    src: AddrRange,
    dst: AddrRange,
    proto: Option<Proto>,
    dport: Option<u16>,
) -> Leaf {
    let src_rel = host_relation(&src, host);
    let dst_rel = host_relation(&dst, host);
    if src_rel == Overlap::Partial {
        return Leaf::Split(Side::Src);
    }
    if dst_rel == Overlap::Partial {
        return Leaf::Split(Side::Dst);
    }
    let src_local = src_rel == Overlap::Full;
    let dst_local = dst_rel == Overlap::Full;
    if !src_local && !dst_local {
        return Leaf::Skip;
    }
    let loopback = src_local && dst_local;

    let new = Packet {
        src,
        dst,
        proto,
        sport: None,
        dport,
        established: false,
        loopback,
    };
    let reply = Packet {
        src: dst,
        dst: src,
        proto,
        sport: dport,
        dport: None,
        established: true,
        loopback,
    };
    // (leg, chain, packet, whether the packet's src is the query's src)
    let mut legs: Vec<(Leg, Chain, &Packet, bool)> = Vec::new();
    if src_local {
        legs.push((Leg::New, Chain::Output, &new, true));
    }
    if dst_local {
        legs.push((Leg::New, Chain::Input, &new, true));
    }
    if dst_local {
        legs.push((Leg::Reply, Chain::Output, &reply, false));
    }
    if src_local {
        legs.push((Leg::Reply, Chain::Input, &reply, false));
    }

    let mut trace = Vec::new();
    for (leg, chain, packet, forward) in legs {
        match eval_chain(rs, chain, leg, packet) {
            ChainResult::Split(side) => {
                let side = match (side, forward) {
                    (s, true) => s,
                    (Side::Src, false) => Side::Dst,
                    (Side::Dst, false) => Side::Src,
                };
                return Leaf::Split(side);
            }
            ChainResult::Done(accepted, steps) => {
                trace.extend(steps);
                if !accepted {
                    return Leaf::Decided(Decision {
                        verdict: Verdict::Denied,
                        trace,
                    });
                }
            }
        }
    }
    Leaf::Decided(Decision {
        verdict: Verdict::Allowed,
        trace,
    })
}

fn eval_ranges(
    rs: &Ruleset,
    host: &AddrRange,
    src: AddrRange,
    dst: AddrRange,
    proto: Option<Proto>,
    dport: Option<u16>,
) -> Option<Decision> {
    match eval_leaf(rs, host, src, dst, proto, dport) {
        Leaf::Decided(d) => Some(d),
        Leaf::Skip => None,
        Leaf::Split(side) => {
            let halves = match side {
                Side::Src => {
                    let (a, b) = src.split();
                    [(a, dst), (b, dst)]
                }
                Side::Dst => {
                    let (a, b) = dst.split();
                    [(src, a), (src, b)]
                }
            };
            let mut first: Option<Decision> = None;
            for (s, d) in halves {
                if let Some(dec) = eval_ranges(rs, host, s, d, proto, dport) {
                    if !dec.allowed() {
                        return Some(dec);
                    }
                    first.get_or_insert(dec);
                }
            }
            first
        }
    }
}

/// Decides whether `src` can open a connection to `dst` through the
/// ruleset installed on `rs.installed_on`. Blocks are allowed only if every
/// address pair in them is; address pairs that do not involve the host are
/// outside its control and ignored.
pub fn can_initiate(
    rs: &Ruleset,
    src: &HostAddr,
    dst: &HostAddr,
    proto: Option<Proto>,
    dport: Option<u16>,
) -> Result<Decision, FwError> {
    let host = rs.installed_on.ok_or(FwError::NotInstalled)?;
    let host_range = HostAddr::host(host.addr).range();
    if src.is_v6() != host.is_v6() || dst.is_v6() != host.is_v6() {
        return Err(FwError::FamilyMismatch {
            src: src.to_string(),
            dst: dst.to_string(),
            host: host.to_string(),
        });
    }
    eval_ranges(rs, &host_range, src.range(), dst.range(), proto, dport).ok_or_else(|| {
        FwError::NotApplicable {
            src: src.to_string(),
            dst: dst.to_string(),
            host: host.to_string(),
        }
    })
}

/// One line of an assertion file:
/// `SRC DST PROTO|- DPORT|- allowed|denied`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub src: HostAddr,
    pub dst: HostAddr,
    pub proto: Option<Proto>,
    pub dport: Option<u16>,
    pub expect: Verdict,
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.src, self.dst)?;
        match (self.proto, self.dport) {
            (Some(p), Some(d)) => write!(f, " {p}/{d}")?,
            (Some(p), None) => write!(f, " {p}")?,
            (None, Some(d)) => write!(f, " port {d}")?,
            (None, None) => {}
        }
        write!(f, " {}", self.expect)
    }
}

impl FromStr for Assertion {
    type Err = FwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        let [src, dst, proto, dport, expect] = fields[..] else {
            return Err(FwError::Syntax(format!(
                "expected `SRC DST PROTO|- DPORT|- allowed|denied`, found `{s}`"
            )));
        };
        let proto = match proto {
            "-" => None,
            p => Some(p.parse()?),
        };
        let dport = match dport {
            "-" => None,
            d => Some(
                d.parse::<u16>()
                    .map_err(|_| FwError::Syntax(format!("invalid port `{d}`")))?,
            ),
        };
        Ok(Assertion {
            src: src.parse()?,
            dst: dst.parse()?,
            proto,
            dport,
            expect: expect.parse()?,
        })
    }
}

pub fn parse_assertions(text: &str) -> Result<Vec<Assertion>, FwError> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then(|| {
                line.parse().map_err(|e| FwError::Line {
                    line: i + 1,
                    error: Box::new(e),
                })
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AuditEntry {
    pub assertion: Assertion,
    pub outcome: Result<Decision, FwError>,
}

impl AuditEntry {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(d) if d.verdict == self.assertion.expect)
    }
}

#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(AuditEntry::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| !e.passed())
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let status = if e.passed() { "PASS" } else { "FAIL" };
            match &e.outcome {
                Ok(d) => writeln!(
                    f,
                    "{status} {}: got {} [{}]",
                    e.assertion,
                    d.verdict,
                    d.trace_text()
                )?,
                Err(err) => writeln!(f, "{status} {}: error: {err}", e.assertion)?,
            }
        }
        let failed = self.failures().count();
        writeln!(
            f,
            "{} assertions, {} passed, {} failed",
            self.entries.len(),
            self.entries.len() - failed,
            failed
        )
    }
}

/// Evaluates every assertion; errors are recorded per assertion.
pub fn audit(rs: &Ruleset, assertions: &[Assertion]) -> AuditReport {
    AuditReport {
        entries: assertions
            .iter()
            .map(|a| AuditEntry {
                assertion: a.clone(),
                outcome: can_initiate(rs, &a.src, &a.dst, a.proto, a.dport),
            })
            .collect(),
    }
}
