//! Drives the `archtaint` command in-process, as a script or test would.

use archtaint::cli::run;

pub fn main() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/measrdroid.arch");
    let mut out = Vec::new();
    let mut err = Vec::new();
    let status = run(["archtaint", "fw-gen", fixture, "--host", "CollectDroid"], &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
    println!("exit status {status}");
}
