//! Host-local stateful firewalls: generation from an architecture,
//! the `iptables-save` text form, and reachability audits.

mod addr;
mod eval;
mod generate;
mod rule;
mod save;

use thiserror::Error;

pub use addr::{AddrRange, HostAddr, Overlap};
pub use eval::{
    audit, can_initiate, parse_assertions, Assertion, AuditEntry, AuditReport, Decision, Leg,
    StepOutcome, TraceStep, Verdict,
};
pub use generate::{conformance_assertions, generate_ruleset, resolve_host, HostSelector};
pub use rule::{Chain, FwRule, Policy, PortRange, Proto, Ruleset, StateMatch, Target};
pub use save::{parse_ruleset, render_rule, serialize_ruleset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FwError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("invalid address `{0}`")]
    InvalidAddress(String),
    #[error("line {line}: {error}")]
    Line { line: usize, error: Box<FwError> },
    #[error("ruleset has no installed-on host")]
    NotInstalled,
    #[error("neither {src} nor {dst} is the installed-on host {host}")]
    NotApplicable {
        src: String,
        dst: String,
        host: String,
    },
    #[error("{src} -> {dst} mixes address families with the installed-on host {host}")]
    FamilyMismatch {
        src: String,
        dst: String,
        host: String,
    },
    #[error("`{0}` has no host address")]
    NoAddress(String),
    #[error("`{0}` spans several host addresses")]
    AmbiguousHost(String),
}
