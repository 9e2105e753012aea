use std::fmt;
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};
use std::str::FromStr;

use super::FwError;

/// An IP address with an optional CIDR prefix length.
///
/// The address is kept as written, so `131.159.20.190/24` round-trips
/// unchanged even though only its first 24 bits matter for matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HostAddr {
    pub addr: IpAddr,
    pub prefix: Option<u8>,
}

impl HostAddr {
    pub fn new(addr: IpAddr, prefix: Option<u8>) -> Result<Self, FwError> {
        let max = max_prefix(&addr);
        match prefix {
            Some(p) if p > max => Err(FwError::InvalidAddress(format!("{addr}/{p}"))),
            _ => Ok(HostAddr { addr, prefix }),
        }
    }

    pub fn host(addr: IpAddr) -> Self {
        HostAddr { addr, prefix: None }
    }

    /// Effective prefix length: the written one, or the full width.
    pub fn prefix_len(&self) -> u8 {
        self.prefix.unwrap_or_else(|| max_prefix(&self.addr))
    }

    pub fn is_v6(&self) -> bool {
        self.addr.is_ipv6()
    }

    /// The address range this denotes.
    pub fn range(&self) -> AddrRange {
        AddrRange::new(self.is_v6(), to_bits(&self.addr), self.prefix_len())
    }

    /// True iff `ip` agrees with this address on the leading prefix bits.
    pub fn contains(&self, ip: &IpAddr) -> bool {
        self.range().contains(ip)
    }
}

impl fmt::Display for HostAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.prefix {
            Some(p) => write!(f, "{}/{}", self.addr, p),
            None => write!(f, "{}", self.addr),
        }
    }
}

impl FromStr for HostAddr {
    type Err = FwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FwError::InvalidAddress(s.to_string());
        let (addr, prefix) = match s.split_once('/') {
            Some((a, p)) => {
                if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(bad());
                }
                (a, Some(p.parse::<u8>().map_err(|_| bad())?))
            }
            None => (s, None),
        };
        let addr: IpAddr = addr.parse().map_err(|_| bad())?;
        HostAddr::new(addr, prefix).map_err(|_| bad())
    }
}

fn max_prefix(addr: &IpAddr) -> u8 {
    if addr.is_ipv6() {
        128
    } else {
        32
    }
}

fn to_bits(addr: &IpAddr) -> u128 {
    match addr {
        IpAddr::V4(a) => u32::from(*a) as u128,
        IpAddr::V6(a) => u128::from(*a),
    }
}

/// A CIDR block as (family, masked base bits, prefix length).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AddrRange {
    pub v6: bool,
    pub base: u128,
    pub len: u8,
}

/// How a rule's address range relates to a queried range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overlap {
    /// The queried range lies inside the rule's range.
    Full,
    /// Disjoint ranges.
    None,
    /// The rule covers only part of the queried range.
    Partial,
}

impl AddrRange {
    pub fn new(v6: bool, bits: u128, len: u8) -> Self {
        AddrRange {
            v6,
            base: bits & mask(v6, len),
            len,
        }
    }

    fn width(&self) -> u8 {
        if self.v6 {
            128
        } else {
            32
        }
    }

    pub fn is_single(&self) -> bool {
        self.len == self.width()
    }

    pub fn contains(&self, ip: &IpAddr) -> bool {
        ip.is_ipv6() == self.v6 && to_bits(ip) & mask(self.v6, self.len) == self.base
    }

    /// Relation of `query` to `self`, where `self` is the matching range.
    pub fn overlap(&self, query: &AddrRange) -> Overlap {
        if self.v6 != query.v6 {
            return Overlap::None;
        }
        let shorter = self.len.min(query.len);
        let m = mask(self.v6, shorter);
        if self.base & m != query.base & m {
            Overlap::None
        } else if self.len <= query.len {
            Overlap::Full
        } else {
            Overlap::Partial
        }
    }

    /// Splits into the two halves one bit longer. Must not be a single
    /// address.
    pub fn split(&self) -> (AddrRange, AddrRange) {
        let len = self.len + 1;
        let bit = 1u128 << (self.width() - len);
        (
            AddrRange { v6: self.v6, base: self.base, len },
            AddrRange { v6: self.v6, base: self.base | bit, len },
        )
    }

    pub fn first_addr(&self) -> IpAddr {
        if self.v6 {
            IpAddr::V6(Ipv6Addr::from(self.base))
        } else {
            IpAddr::V4(Ipv4Addr::from(self.base as u32))
        }
    }
}

impl fmt::Display for AddrRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single() {
            write!(f, "{}", self.first_addr())
        } else {
            write!(f, "{}/{}", self.first_addr(), self.len)
        }
    }
}

fn mask(v6: bool, len: u8) -> u128 {
    let (width, full) = if v6 {
        (128u32, u128::MAX)
    } else {
        (32u32, u32::MAX as u128)
    };
    match width - len as u32 {
        0 => full,
        host_bits if host_bits >= width => 0,
        host_bits => full & !((1u128 << host_bits) - 1),
    }
}
