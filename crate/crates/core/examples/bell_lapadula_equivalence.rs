//! Projects taint labels onto Bell-LaPadula attributes and shows that both
//! invariants agree on a sound and an unsound architecture.

use archtaint::blp::{first_failing_label, project_label, project_label_set, verify_equivalence};
use archtaint::{fixtures, ArchitectureSpec, Label, LabelSet};

pub fn main() {
    for text in [fixtures::SMART_HOME, fixtures::SMART_HOME_BROKEN] {
        let spec = ArchitectureSpec::parse(text).unwrap();
        let labels = spec.effective_labels().unwrap();
        let holds = verify_equivalence(&spec.graph, &labels).expect("the two invariants agree");
        println!("invariant holds: {holds}");
        if let Some(a) = first_failing_label(&spec.graph, &labels).unwrap() {
            println!("  first failing label: {a}");
        }
    }

    let spec = ArchitectureSpec::parse(fixtures::SMART_HOME).unwrap();
    let labels = spec.effective_labels().unwrap();
    let location = Label::new("location").unwrap();
    for node in spec.graph.nodes() {
        println!("{node}: {}", project_label(&location, labels.get(node)));
    }

    let watched: LabelSet = ["location", "temp"].into_iter().map(|s| Label::new(s).unwrap()).collect();
    for node in spec.graph.nodes() {
        let c = project_label_set(&watched, labels.get(node).taints());
        println!("{node}: level {} for {{location, temp}}", c.0);
    }
}
