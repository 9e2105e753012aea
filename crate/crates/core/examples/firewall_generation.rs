//! Generates host firewalls for the MeasrDroid deployment.

use archtaint::firewall::{generate_ruleset, serialize_ruleset, HostSelector};
use archtaint::{fixtures, ArchitectureSpec};

pub fn main() {
    let spec = ArchitectureSpec::parse(fixtures::MEASRDROID).unwrap();
    for host in ["CollectDroid", "UploadDroid"] {
        let selector = HostSelector::Name(host.to_owned());
        let rules = generate_ruleset(&spec, &selector).unwrap();
        println!("# {host}");
        print!("{}", serialize_ruleset(&rules));
    }
}
