//! Renders the broken smart-home architecture with its offending flow in
//! red. Pipe the output into `dot -Tsvg`.

use archtaint::report::export_dot;
use archtaint::{analyze, fixtures, ArchitectureSpec};

pub fn main() {
    let spec = ArchitectureSpec::parse(fixtures::SMART_HOME_BROKEN).unwrap();
    let findings = analyze(&spec).unwrap().findings;
    print!("{}", export_dot(&spec, &findings));
}
