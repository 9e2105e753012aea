//! Ranks the IDEM components by how many labels they hold.

use archtaint::report::criticality_metrics;
use archtaint::{fixtures, ArchitectureSpec};

pub fn main() {
    let spec = ArchitectureSpec::parse(fixtures::IDEM).unwrap();
    let metrics = criticality_metrics(&spec).unwrap();
    print!("{}", metrics.to_text());

    let mut ranked: Vec<_> = metrics.nodes.iter().collect();
    ranked.sort_by(|a, b| b.1.taint_count.cmp(&a.1.taint_count).then(a.0.cmp(b.0)));
    println!("most critical: {}", ranked[0].0);
}
