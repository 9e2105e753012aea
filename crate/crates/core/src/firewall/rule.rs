use std::fmt;
use std::str::FromStr;

use super::addr::HostAddr;
use super::FwError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chain {
    Input,
    Forward,
    Output,
}

impl Chain {
    pub const ALL: [Chain; 3] = [Chain::Input, Chain::Forward, Chain::Output];

    pub fn as_str(self) -> &'static str {
        match self {
            Chain::Input => "INPUT",
            Chain::Forward => "FORWARD",
            Chain::Output => "OUTPUT",
        }
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Chain {
    type Err = FwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "INPUT" => Ok(Chain::Input),
            "FORWARD" => Ok(Chain::Forward),
            "OUTPUT" => Ok(Chain::Output),
            other => Err(FwError::Unsupported(format!("chain {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Accept,
    Drop,
    /// Non-terminating.
    Log,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Accept => "ACCEPT",
            Target::Drop => "DROP",
            Target::Log => "LOG",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = FwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ACCEPT" => Ok(Target::Accept),
            "DROP" => Ok(Target::Drop),
            "LOG" => Ok(Target::Log),
            other => Err(FwError::Unsupported(format!("target {other}"))),
        }
    }
}

/// Default verdict of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    Accept,
    Drop,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Accept => "ACCEPT",
            Policy::Drop => "DROP",
        }
    }

    pub fn accepts(self) -> bool {
        self == Policy::Accept
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Proto {
    Tcp,
    Udp,
    Icmp,
}

impl Proto {
    pub fn as_str(self) -> &'static str {
        match self {
            Proto::Tcp => "tcp",
            Proto::Udp => "udp",
            Proto::Icmp => "icmp",
        }
    }

    pub fn has_ports(self) -> bool {
        matches!(self, Proto::Tcp | Proto::Udp)
    }
}

impl fmt::Display for Proto {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Proto {
    type Err = FwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tcp" => Ok(Proto::Tcp),
            "udp" => Ok(Proto::Udp),
            "icmp" => Ok(Proto::Icmp),
            other => Err(FwError::Unsupported(format!("protocol {other}"))),
        }
    }
}

/// An inclusive port range; a single port has `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PortRange {
    pub lo: u16,
    pub hi: u16,
}

impl PortRange {
    pub fn single(port: u16) -> Self {
        PortRange { lo: port, hi: port }
    }

    pub fn contains(&self, port: u16) -> bool {
        self.lo <= port && port <= self.hi
    }
}

impl fmt::Display for PortRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}:{}", self.lo, self.hi)
        }
    }
}

impl FromStr for PortRange {
    type Err = FwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let port = |p: &str| {
            p.parse::<u16>()
                .map_err(|_| FwError::Syntax(format!("invalid port `{s}`")))
        };
        let range = match s.split_once(':') {
            Some((lo, hi)) => PortRange {
                lo: port(lo)?,
                hi: port(hi)?,
            },
            None => PortRange::single(port(s)?),
        };
        if range.lo > range.hi {
            return Err(FwError::Syntax(format!("empty port range `{s}`")));
        }
        Ok(range)
    }
}

/// The connection-tracking states a rule matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateMatch {
    Established,
    /// Treated exactly like `Established`.
    EstablishedRelated,
}

impl StateMatch {
    pub fn as_str(self) -> &'static str {
        match self {
            StateMatch::Established => "ESTABLISHED",
            StateMatch::EstablishedRelated => "ESTABLISHED,RELATED",
        }
    }
}

/// One `-A` line of a filter table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FwRule {
    pub chain: Chain,
    pub src: Option<HostAddr>,
    pub dst: Option<HostAddr>,
    pub proto: Option<Proto>,
    /// Whether the rule carries an explicit `-m tcp`/`-m udp` match module.
    /// It has no effect on matching.
    pub proto_module: bool,
    pub state: Option<StateMatch>,
    pub sport: Option<PortRange>,
    pub dport: Option<PortRange>,
    pub in_if: Option<String>,
    pub out_if: Option<String>,
    pub target: Target,
}

impl FwRule {
    pub fn new(chain: Chain, target: Target) -> Self {
        FwRule {
            chain,
            src: None,
            dst: None,
            proto: None,
            proto_module: false,
            state: None,
            sport: None,
            dport: None,
            in_if: None,
            out_if: None,
            target,
        }
    }

    pub fn src(mut self, addr: HostAddr) -> Self {
        self.src = Some(addr);
        self
    }

    pub fn dst(mut self, addr: HostAddr) -> Self {
        self.dst = Some(addr);
        self
    }

    pub fn established(mut self) -> Self {
        self.state = Some(StateMatch::Established);
        self
    }

    pub fn proto(mut self, proto: Proto) -> Self {
        self.proto = Some(proto);
        self
    }

    pub fn dport(mut self, range: PortRange) -> Self {
        self.dport = Some(range);
        self
    }
}

/// A filter table: chain policies plus an ordered rule list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ruleset {
    pub input: Policy,
    pub forward: Policy,
    pub output: Policy,
    pub rules: Vec<FwRule>,
    /// The host this ruleset is installed on. Not part of the text format.
    pub installed_on: Option<HostAddr>,
}

impl Default for Ruleset {
    fn default() -> Self {
        Ruleset {
            input: Policy::Drop,
            forward: Policy::Drop,
            output: Policy::Drop,
            rules: Vec::new(),
            installed_on: None,
        }
    }
}

impl Ruleset {
    /// Default-deny on every chain, no rules.
    pub fn deny_all() -> Self {
        Self::default()
    }

    pub fn policy(&self, chain: Chain) -> Policy {
        match chain {
            Chain::Input => self.input,
            Chain::Forward => self.forward,
            Chain::Output => self.output,
        }
    }

    pub fn set_policy(&mut self, chain: Chain, policy: Policy) {
        match chain {
            Chain::Input => self.input = policy,
            Chain::Forward => self.forward = policy,
            Chain::Output => self.output = policy,
        }
    }

    pub fn installed_on(mut self, host: HostAddr) -> Self {
        self.installed_on = Some(host);
        self
    }

    /// Rules of `chain` with their positions in [`Ruleset::rules`].
    pub fn chain_rules(&self, chain: Chain) -> impl Iterator<Item = (usize, &FwRule)> {
        self.rules
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.chain == chain)
    }
}
