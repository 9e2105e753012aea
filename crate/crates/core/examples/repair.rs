//! Removes the offending flows from a broken architecture and prints the
//! repaired document.

use archtaint::taint::{check_tainting_full, offending_flows, repair};
use archtaint::{fixtures, serialize_spec, ArchitectureSpec};

pub fn main() {
    let spec = ArchitectureSpec::parse(fixtures::SMART_HOME_BROKEN).unwrap();
    let labels = spec.effective_labels().unwrap();
    for flow in offending_flows(&spec.graph, &labels) {
        println!("# removed: {}", flow.edge);
    }
    let repaired = ArchitectureSpec {
        graph: repair(&spec.graph, &labels),
        ..spec
    };
    assert!(check_tainting_full(&repaired.graph, &labels));
    print!("{}", serialize_spec(&repaired));
}
