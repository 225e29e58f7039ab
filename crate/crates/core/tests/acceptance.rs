//! The eight acceptance criteria, each reported on its own line.

use hyperlab::verify::{run_suite, Suite};

fn main() {
    let outcomes = run_suite(Suite::All, 7);
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if outcomes.len() != 8 || !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all 8 criteria passed");
}
