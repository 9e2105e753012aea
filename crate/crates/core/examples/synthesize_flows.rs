//! Lists every flow the labels and system boundaries of the IDEM
//! architecture would permit.

use archtaint::taint::synthesize_max_policy;
use archtaint::{fixtures, ArchitectureSpec};

pub fn main() {
    let spec = ArchitectureSpec::parse(fixtures::IDEM).unwrap();
    let labels = spec.effective_labels().unwrap();
    let nodes: Vec<_> = spec.graph.nodes().iter().cloned().collect();

    let unrestricted = synthesize_max_policy(&nodes, &labels, None);
    let bounded = synthesize_max_policy(&nodes, &labels, Some(&spec.layout));
    println!(
        "{} declared flows, {} permitted by labels, {} also respecting boundaries",
        spec.graph.edges().len(),
        unrestricted.edges().len(),
        bounded.edges().len()
    );
    for e in spec.graph.edges() {
        assert!(unrestricted.contains_edge(e));
    }
    for e in bounded.edges() {
        println!("edge {e}");
    }
}
