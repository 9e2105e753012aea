//! Reading and writing the restricted `iptables-save` dialect.
//!
//! Only the filter table is understood, with the matches `-s`, `-d`, `-p`,
//! `-m state --state ESTABLISHED[,RELATED]`, `-m tcp|udp|icmp`, `--sport`,
//! `--dport`, `-i`, `-o` and the targets ACCEPT, DROP and LOG. Anything else
//! is rejected rather than skipped, since skipping a rule would make every
//! later verdict unsound.

use std::fmt::Write as _;

use super::addr::HostAddr;
use super::rule::{Chain, FwRule, Policy, Proto, Ruleset, StateMatch, Target};
use super::FwError;

/// Renders `rs` in `iptables-save` form. Generated rulesets are emitted
/// byte-for-byte in the layout `iptables-save` itself produces.
pub fn serialize_ruleset(rs: &Ruleset) -> String {
    let mut out = String::from("*filter\n");
    for chain in Chain::ALL {
        let _ = writeln!(out, ":{} {} [0:0]", chain, rs.policy(chain));
    }
    for rule in &rs.rules {
        out.push_str(&render_rule(rule));
        out.push('\n');
    }
    out.push_str("COMMIT\n");
    out
}

pub fn render_rule(rule: &FwRule) -> String {
    let mut parts = vec![format!("-A {}", rule.chain)];
    if let Some(i) = &rule.in_if {
        parts.push(format!("-i {i}"));
    }
    if let Some(o) = &rule.out_if {
        parts.push(format!("-o {o}"));
    }
    if let Some(state) = rule.state {
        parts.push(format!("-m state --state {}", state.as_str()));
    }
    if let Some(s) = &rule.src {
        parts.push(format!("-s {s}"));
    }
    if let Some(d) = &rule.dst {
        parts.push(format!("-d {d}"));
    }
    if let Some(p) = rule.proto {
        parts.push(format!("-p {p}"));
        if rule.proto_module {
            parts.push(format!("-m {p}"));
        }
    }
    if let Some(d) = &rule.dport {
        parts.push(format!("--dport {d}"));
    }
    if let Some(s) = &rule.sport {
        parts.push(format!("--sport {s}"));
    }
    parts.push(format!("-j {}", rule.target));
    parts.join(" ")
}

/// Parses a filter table. Chain policies not listed default to ACCEPT, as
/// in the kernel.
pub fn parse_ruleset(text: &str) -> Result<Ruleset, FwError> {
    let mut rs = Ruleset {
        input: Policy::Accept,
        forward: Policy::Accept,
        output: Policy::Accept,
        rules: Vec::new(),
        installed_on: None,
    };
    let mut in_table = false;
    let mut committed = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |error: FwError| FwError::Line {
            line: idx + 1,
            error: Box::new(error),
        };
        if committed {
            return Err(at(FwError::Syntax("content after COMMIT".into())));
        }
        if let Some(table) = line.strip_prefix('*') {
            if in_table {
                return Err(at(FwError::Syntax("nested table header".into())));
            }
            if table != "filter" {
                return Err(at(FwError::Unsupported(format!("table *{table}"))));
            }
            in_table = true;
            continue;
        }
        if !in_table {
            return Err(at(FwError::Syntax("expected `*filter`".into())));
        }
        if line == "COMMIT" {
            committed = true;
        } else if let Some(decl) = line.strip_prefix(':') {
            let (chain, policy) = parse_policy(decl).map_err(at)?;
            rs.set_policy(chain, policy);
        } else if line.starts_with("-A") {
            rs.rules.push(parse_rule(line).map_err(at)?);
        } else {
            let token = line.split_whitespace().next().unwrap_or(line);
            return Err(at(FwError::Unsupported(token.to_string())));
        }
    }
    if !committed {
        return Err(FwError::Syntax("missing COMMIT".into()));
    }
    Ok(rs)
}

fn parse_policy(decl: &str) -> Result<(Chain, Policy), FwError> {
    let mut it = decl.split_whitespace();
    let chain = it
        .next()
        .ok_or_else(|| FwError::Syntax("empty chain declaration".into()))?;
    let chain: Chain = chain
        .parse()
        .map_err(|_| FwError::Unsupported(format!("custom chain {chain}")))?;
    let policy = match it.next() {
        Some("ACCEPT") => Policy::Accept,
        Some("DROP") => Policy::Drop,
        Some(other) => return Err(FwError::Syntax(format!("invalid policy `{other}`"))),
        None => return Err(FwError::Syntax(format!("missing policy for {chain}"))),
    };
    match it.next() {
        None => {}
        Some(c) if c.starts_with('[') && c.ends_with(']') => {}
        Some(other) => return Err(FwError::Syntax(format!("unexpected `{other}`"))),
    }
    if let Some(extra) = it.next() {
        return Err(FwError::Syntax(format!("unexpected `{extra}`")));
    }
    Ok((chain, policy))
}

fn parse_rule(line: &str) -> Result<FwRule, FwError> {
    let mut tokens = line.split_whitespace().peekable();
    tokens.next(); // -A
    let chain: Chain = tokens
        .next()
        .ok_or_else(|| FwError::Syntax("missing chain after -A".into()))?
        .parse()?;

    let mut rule = FwRule::new(chain, Target::Accept);
    let mut target = None;
    let mut proto_module = None;

    fn set<T>(slot: &mut Option<T>, value: T, flag: &str) -> Result<(), FwError> {
        if slot.is_some() {
            return Err(FwError::Syntax(format!("duplicate {flag}")));
        }
        *slot = Some(value);
        Ok(())
    }

    while let Some(flag) = tokens.next() {
        let mut value = || {
            tokens
                .next()
                .ok_or_else(|| FwError::Syntax(format!("missing value for {flag}")))
        };
        match flag {
            "-s" => set(&mut rule.src, value()?.parse::<HostAddr>()?, flag)?,
            "-d" => set(&mut rule.dst, value()?.parse::<HostAddr>()?, flag)?,
            "-p" => set(&mut rule.proto, value()?.parse::<Proto>()?, flag)?,
            "-i" => set(&mut rule.in_if, value()?.to_string(), flag)?,
            "-o" => set(&mut rule.out_if, value()?.to_string(), flag)?,
            "--sport" => set(&mut rule.sport, value()?.parse()?, flag)?,
            "--dport" => set(&mut rule.dport, value()?.parse()?, flag)?,
            "-j" => set(&mut target, value()?.parse::<Target>()?, flag)?,
            "-m" => match value()? {
                "state" => {
                    if tokens.next() != Some("--state") {
                        return Err(FwError::Syntax("expected --state after -m state".into()));
                    }
                    // `ESTABLISHED, RELATED` may be split by whitespace.
                    let mut states = tokens
                        .next()
                        .ok_or_else(|| FwError::Syntax("missing value for --state".into()))?
                        .to_string();
                    while states.ends_with(',') {
                        match tokens.next() {
                            Some(more) => states.push_str(more),
                            None => break,
                        }
                    }
                    set(&mut rule.state, parse_state(&states)?, "--state")?;
                }
                module @ ("tcp" | "udp" | "icmp") => {
                    set(&mut proto_module, module.parse::<Proto>()?, "-m")?;
                }
                other => return Err(FwError::Unsupported(format!("-m {other}"))),
            },
            other => return Err(FwError::Unsupported(other.to_string())),
        }
    }

    rule.target = target.ok_or_else(|| FwError::Syntax("missing -j target".into()))?;
    if let Some(module) = proto_module {
        if rule.proto != Some(module) {
            return Err(FwError::Syntax(format!("-m {module} requires -p {module}")));
        }
        rule.proto_module = true;
    }
    if (rule.sport.is_some() || rule.dport.is_some())
        && !rule.proto.is_some_and(Proto::has_ports)
    {
        return Err(FwError::Syntax("port match requires -p tcp or -p udp".into()));
    }
    Ok(rule)
}

fn parse_state(states: &str) -> Result<StateMatch, FwError> {
    let mut parts: Vec<&str> = states.split(',').map(str::trim).collect();
    parts.sort_unstable();
    parts.dedup();
    match parts.as_slice() {
        ["ESTABLISHED"] => Ok(StateMatch::Established),
        ["ESTABLISHED", "RELATED"] => Ok(StateMatch::EstablishedRelated),
        _ => Err(FwError::Unsupported(format!("--state {states}"))),
    }
}
