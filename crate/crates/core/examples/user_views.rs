//! Shows, per label, which components may hold the data and where it goes.

use archtaint::report::user_view;
use archtaint::{fixtures, ArchitectureSpec, Label};

pub fn main() {
    let spec = ArchitectureSpec::parse(fixtures::SMART_HOME).unwrap();
    for name in ["location", "energy"] {
        let view = user_view(&spec, &Label::new(name).unwrap()).unwrap();
        println!("== {name}");
        print!("{}", view.to_text());
    }
}
