// Empirical size of the three tests under strong and weak noise.
// Pass a replication count as the first argument (default 200).

use pvar::mc::{preset, run_scenario};
use pvar::report::mc_table;

pub fn run_example_with(reps: usize) -> pvar::Result<()> {
    for name in ["model-I", "model-II"] {
        let mut scenario = preset(name).expect("preset");
        scenario.reps = reps;
        let report = run_scenario(&scenario)?;
        print!("{}", mc_table(&report));
        println!("elapsed {:.2?}\n", report.wall_time);
    }
    Ok(())
}

pub fn run_example() -> pvar::Result<()> {
    run_example_with(20)
}

#[allow(dead_code)]
fn main() {
    let reps = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    run_example_with(reps).unwrap();
}
