//! Checks the smart-home architecture, then the variant whose anonymizer
//! forgets to strip location data.

use archtaint::{analyze, fixtures, ArchitectureSpec};

pub fn main() {
    for (name, text) in [
        ("smart-home", fixtures::SMART_HOME),
        ("smart-home-broken", fixtures::SMART_HOME_BROKEN),
    ] {
        let spec = ArchitectureSpec::parse(text).expect("bundled fixture parses");
        let analysis = analyze(&spec).expect("bundled fixture is consistent");
        println!("== {name}");
        print!("{}", analysis.to_text());
    }
}
