//! Replays the bundled six-operator scenario end to end and prints the
//! transaction log and settlement report.
//!
//!     cargo run --example six_operators [-- <scenario.toml>]

use std::path::PathBuf;

use moss::scenario::{run_scenario, tx_log_text, RunOptions, ScenarioConfig, SettlementReport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/six_operators.toml"))
    });
    let config = ScenarioConfig::load(&path)?;
    let run = run_scenario(&config, &RunOptions::default())?;

    print!("{}", tx_log_text(&run));
    println!();
    print!("{}", SettlementReport::from_run(&run).render());
    println!("\nsafety audit: {} commits across {} honest replicas", run.safety.commits, run.honest_replicas.len());
    Ok(())
}
