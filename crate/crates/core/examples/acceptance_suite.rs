//! Runs the eight acceptance criteria and prints one line per criterion.
//!
//! cargo run --release --example acceptance_suite -- [seed]

use hyperlab::verify::{run_suite, Suite};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let outcomes = run_suite(Suite::All, seed);
    for o in &outcomes {
        println!("{o}");
    }
    if outcomes.iter().any(|o| !o.passed) {
        std::process::exit(1);
    }
}
