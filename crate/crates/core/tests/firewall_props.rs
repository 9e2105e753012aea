mod common;

use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};

use archtaint::firewall::{
    audit, can_initiate, conformance_assertions, generate_ruleset, parse_assertions,
    parse_ruleset, serialize_ruleset, Chain, FwRule, HostAddr, HostSelector, Policy, PortRange,
    Proto, Ruleset, StateMatch, Target, Verdict,
};
use archtaint::{fixtures, ArchitectureSpec};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn v4_in_prefix(net: u32, prefix: u8, ip: u32) -> bool {
    prefix == 0 || (net ^ ip) >> (32 - prefix as u32) == 0
}

fn v6_in_prefix(net: u128, prefix: u8, ip: u128) -> bool {
    prefix == 0 || (net ^ ip) >> (128 - prefix as u32) == 0
}

proptest! {
    #[test]
    fn cidr_membership_matches_bit_arithmetic(net in any::<u32>(), prefix in 0u8..=32, ip in any::<u32>(), flip in 0u32..32) {
        let rule = HostAddr::new(IpAddr::V4(Ipv4Addr::from(net)), Some(prefix)).unwrap();
        prop_assert_eq!(rule.contains(&IpAddr::V4(Ipv4Addr::from(ip))), v4_in_prefix(net, prefix, ip));
        // Addresses differing from the base in one bit sit on either side of the prefix.
        let near = net ^ (1 << flip);
        prop_assert_eq!(rule.contains(&IpAddr::V4(Ipv4Addr::from(near))), v4_in_prefix(net, prefix, near));
    }

    #[test]
    fn cidr_membership_matches_bit_arithmetic_v6(net in any::<u128>(), prefix in 0u8..=128, ip in any::<u128>()) {
        let rule = HostAddr::new(IpAddr::V6(Ipv6Addr::from(net)), Some(prefix)).unwrap();
        prop_assert_eq!(rule.contains(&IpAddr::V6(Ipv6Addr::from(ip))), v6_in_prefix(net, prefix, ip));
        prop_assert!(!rule.contains(&IpAddr::V4(Ipv4Addr::new(1, 2, 3, 4))));
    }

    #[test]
    fn addresses_round_trip(bits in any::<u32>(), prefix in proptest::option::of(0u8..=32)) {
        let a = HostAddr::new(IpAddr::V4(Ipv4Addr::from(bits)), prefix).unwrap();
        prop_assert_eq!(a.to_string().parse::<HostAddr>().unwrap(), a);
    }
}

const HOST: [u8; 4] = [10, 0, 0, 1];

fn host() -> HostAddr {
    HostAddr::host(Ipv4Addr::from(HOST).into())
}

/// Addresses in 10.0.0.0/28, the host included.
fn pool() -> Vec<HostAddr> {
    (0..16u8)
        .map(|i| HostAddr::host(Ipv4Addr::new(10, 0, 0, i).into()))
        .collect()
}

fn random_addr(rng: &mut StdRng) -> Option<HostAddr> {
    match rng.gen_range(0..4) {
        0 => None,
        1 => Some(host()),
        _ => {
            let prefix = rng.gen_range(26..=32);
            let last = rng.gen_range(0..16u8);
            Some(HostAddr::new(Ipv4Addr::new(10, 0, 0, last).into(), Some(prefix)).unwrap())
        }
    }
}

fn random_rule(rng: &mut StdRng) -> FwRule {
    let chain = Chain::ALL[rng.gen_range(0..3)];
    let target = [Target::Accept, Target::Drop, Target::Log][rng.gen_range(0..3)];
    let mut r = FwRule::new(chain, target);
    r.src = random_addr(rng);
    r.dst = random_addr(rng);
    if rng.gen_bool(0.4) {
        let p = [Proto::Tcp, Proto::Udp, Proto::Icmp][rng.gen_range(0..3)];
        r.proto = Some(p);
        r.proto_module = rng.gen_bool(0.3);
        if p.has_ports() && rng.gen_bool(0.5) {
            let lo = rng.gen_range(20..25);
            r.dport = Some(PortRange { lo, hi: lo + rng.gen_range(0..3) });
        }
        if p.has_ports() && rng.gen_bool(0.2) {
            r.sport = Some(PortRange::single(rng.gen_range(20..25)));
        }
    }
    if rng.gen_bool(0.3) {
        r.state = Some(if rng.gen_bool(0.5) {
            StateMatch::Established
        } else {
            StateMatch::EstablishedRelated
        });
    }
    if rng.gen_bool(0.15) {
        r.in_if = Some(if rng.gen_bool(0.5) { "lo" } else { "eth0" }.into());
    }
    if rng.gen_bool(0.15) {
        r.out_if = Some(if rng.gen_bool(0.5) { "lo" } else { "eth0" }.into());
    }
    r
}

fn random_ruleset(rng: &mut StdRng) -> Ruleset {
    let mut rs = Ruleset::deny_all().installed_on(host());
    for chain in Chain::ALL {
        if rng.gen_bool(0.3) {
            rs.set_policy(chain, Policy::Accept);
        }
    }
    rs.rules = (0..rng.gen_range(0..10)).map(|_| random_rule(rng)).collect();
    rs
}

#[test]
fn block_verdicts_agree_with_per_address_verdicts() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0301);
    let block = HostAddr::new(Ipv4Addr::new(10, 0, 0, 0).into(), Some(28)).unwrap();
    for _ in 0..300 {
        let rs = random_ruleset(&mut rng);
        let proto = [None, Some(Proto::Tcp), Some(Proto::Udp)][rng.gen_range(0..3)];
        let dport = proto.filter(|p| p.has_ports()).map(|_| rng.gen_range(20..25));
        // Block as source towards the host, and host towards the block.
        for outgoing in [false, true] {
            let (src, dst) = if outgoing { (host(), block) } else { (block, host()) };
            let d = can_initiate(&rs, &src, &dst, proto, dport).unwrap();
            let each = pool().into_iter().all(|a| {
                let (s, t) = if outgoing { (host(), a) } else { (a, host()) };
                can_initiate(&rs, &s, &t, proto, dport).unwrap().allowed()
            });
            assert_eq!(d.allowed(), each, "{}\n{}", serialize_ruleset(&rs), d.trace_text());
        }
    }
}

#[test]
fn random_rulesets_round_trip() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0302);
    for _ in 0..300 {
        let rs = random_ruleset(&mut rng);
        let text = serialize_ruleset(&rs);
        let back = parse_ruleset(&text).unwrap().installed_on(host());
        assert_eq!(back, rs, "{text}");
        assert_eq!(serialize_ruleset(&back), text);
    }
}

#[test]
fn tuned_ruleset_round_trips_structurally() {
    let rs = parse_ruleset(fixtures::COLLECTDROID_TUNED_RULES).unwrap();
    assert_eq!(rs.rules.len(), 18);
    assert_eq!(rs.rules.iter().filter(|r| r.target == Target::Log).count(), 2);
    assert_eq!(rs.rules[8].dport, Some(PortRange { lo: 67, hi: 68 }));
    assert_eq!(parse_ruleset(&serialize_ruleset(&rs)).unwrap(), rs);
}

fn without_logs(rs: &Ruleset) -> Ruleset {
    let mut out = rs.clone();
    out.rules.retain(|r| r.target != Target::Log);
    out
}

#[test]
fn log_rules_never_change_a_verdict() {
    let collector: HostAddr = "131.159.15.52".parse().unwrap();
    let tuned = parse_ruleset(fixtures::COLLECTDROID_TUNED_RULES)
        .unwrap()
        .installed_on(collector);
    let bare = without_logs(&tuned);
    assert_eq!(bare.rules.len(), 16);
    let peers = ["131.159.15.42", "131.159.20.17", "131.159.20.0/24", "8.8.8.8", "0.0.0.0/0"];
    let protos = [None, Some(Proto::Tcp), Some(Proto::Udp), Some(Proto::Icmp)];
    let ports = [None, Some(22), Some(53), Some(67), Some(80), Some(123), Some(443)];
    let mut checked = 0;
    for peer in peers.iter().map(|p| p.parse::<HostAddr>().unwrap()).chain([collector]) {
        for (src, dst) in [(peer, collector), (collector, peer)] {
            for proto in protos {
                for port in ports {
                    let port = port.filter(|_| proto.is_some_and(Proto::has_ports));
                    let a = can_initiate(&tuned, &src, &dst, proto, port).unwrap();
                    let b = can_initiate(&bare, &src, &dst, proto, port).unwrap();
                    assert_eq!(a.verdict, b.verdict, "{src} -> {dst} {proto:?} {port:?}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 300);

    let mut rng = StdRng::seed_from_u64(0x5eed_0303);
    for _ in 0..300 {
        let rs = random_ruleset(&mut rng);
        let bare = without_logs(&rs);
        for a in pool() {
            for (s, d) in [(a, host()), (host(), a)] {
                assert_eq!(
                    can_initiate(&rs, &s, &d, Some(Proto::Tcp), Some(22)).unwrap().verdict,
                    can_initiate(&bare, &s, &d, Some(Proto::Tcp), Some(22)).unwrap().verdict
                );
            }
        }
    }
}

/// Generate, serialize, parse and audit against the model for every host
/// address of `spec`.
fn conformance_loop(spec: &ArchitectureSpec) -> usize {
    let mut hosts: Vec<HostAddr> = Vec::new();
    for h in spec.hosts.values() {
        if !hosts.contains(h) {
            hosts.push(*h);
        }
    }
    let mut audited = 0;
    for h in hosts {
        let sel = HostSelector::Addr(h);
        let rs = generate_ruleset(spec, &sel).unwrap();
        let parsed = parse_ruleset(&serialize_ruleset(&rs)).unwrap().installed_on(h);
        assert_eq!(parsed, rs);
        let expected = conformance_assertions(spec, &sel).unwrap();
        let report = audit(&parsed, &expected);
        assert!(report.all_passed(), "{h}\n{report}");
        audited += expected.len();
    }
    audited
}

#[test]
fn generated_firewalls_conform_for_every_fixture() {
    for text in [fixtures::SMART_HOME, fixtures::IDEM, fixtures::MEASRDROID] {
        conformance_loop(&ArchitectureSpec::parse(text).unwrap());
    }
    let three_hosts = "\
node Web host=192.168.1.10
node App host=192.168.1.20
node App-worker host=192.168.1.20
node Db host=192.168.1.30
node Admin host=2001:db8::1
node Mon host=2001:db8::2
edge Web -> App
edge App -> Db
edge App-worker -> Db
edge Db -> Web
edge App -> App-worker
edge Admin -> Mon
";
    let spec = ArchitectureSpec::parse(three_hosts).unwrap();
    assert_eq!(conformance_loop(&spec), 3 * 4 + 2 * 2);
}

#[test]
fn bundled_assertions_hold_on_both_collector_rulesets() {
    let collector: HostAddr = "131.159.15.52".parse().unwrap();
    let goals = parse_assertions(fixtures::MEASRDROID_ASSERTIONS).unwrap();
    let ssh = parse_assertions(fixtures::MEASRDROID_SSH_ASSERTIONS).unwrap();
    let generated = parse_ruleset(fixtures::COLLECTDROID_GENERATED_RULES)
        .unwrap()
        .installed_on(collector);
    let tuned = parse_ruleset(fixtures::COLLECTDROID_TUNED_RULES)
        .unwrap()
        .installed_on(collector);
    assert!(audit(&generated, &goals).all_passed());
    assert!(audit(&tuned, &goals).all_passed());
    assert!(audit(&tuned, &ssh).all_passed());
    let denied = audit(&generated, &ssh);
    assert_eq!(denied.entries[0].outcome.as_ref().unwrap().verdict, Verdict::Denied);
}
