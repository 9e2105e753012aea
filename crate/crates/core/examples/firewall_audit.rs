//! Audits the generated and the hand-tuned CollectDroid firewalls against
//! reachability assertions, then checks one connection with a full trace.

use archtaint::firewall::{
    audit, can_initiate, conformance_assertions, generate_ruleset, parse_assertions, parse_ruleset,
    HostAddr, HostSelector, Proto,
};
use archtaint::{fixtures, ArchitectureSpec};

pub fn main() {
    let host: HostAddr = "131.159.15.52".parse().unwrap();
    let mut assertions = parse_assertions(fixtures::MEASRDROID_ASSERTIONS).unwrap();
    assertions.extend(parse_assertions(fixtures::MEASRDROID_SSH_ASSERTIONS).unwrap());

    for (name, text) in [
        ("generated", fixtures::COLLECTDROID_GENERATED_RULES),
        ("tuned", fixtures::COLLECTDROID_TUNED_RULES),
    ] {
        let rules = parse_ruleset(text).unwrap().installed_on(host);
        println!("== {name}");
        print!("{}", audit(&rules, &assertions));
    }

    let tuned = parse_ruleset(fixtures::COLLECTDROID_TUNED_RULES).unwrap().installed_on(host);
    let google: HostAddr = "8.8.8.8".parse().unwrap();
    let decision = can_initiate(&tuned, &host, &google, Some(Proto::Tcp), Some(443)).unwrap();
    println!("{host} -> {google} tcp/443: {}", decision.verdict);
    println!("  {}", decision.trace_text());

    let spec = ArchitectureSpec::parse(fixtures::MEASRDROID).unwrap();
    let generated = generate_ruleset(&spec, &HostSelector::Addr(host)).unwrap();
    let derived = conformance_assertions(&spec, &HostSelector::Addr(host)).unwrap();
    let report = audit(&generated, &derived);
    println!("generated ruleset conforms to the model: {}", report.all_passed());
}
