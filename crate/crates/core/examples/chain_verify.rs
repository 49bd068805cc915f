//! Runs a scenario, writes its chain file, verifies it from disk, and shows
//! that flipping one byte is caught.
//!
//!     cargo run --example chain_verify

use moss::scenario::{run_scenario, verify_chain_bytes, verify_chain_file, RunOptions, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/six_operators.toml");
    let run = run_scenario(&ScenarioConfig::load(path.as_ref())?, &RunOptions::default())?;

    let file = std::env::temp_dir().join("moss-example-chain.moss");
    std::fs::write(&file, &run.chain_file)?;
    let verified = verify_chain_file(&file)?;
    println!("{}: {} bytes, {} blocks", file.display(), run.chain_file.len(), verified.blocks);
    println!("live state digest     {}", run.state_digest);
    println!("replayed state digest {}", verified.state_digest);
    assert_eq!(verified.state_digest, run.state_digest);

    for offset in [20, run.chain_file.len() / 2, run.chain_file.len() - 1] {
        let mut bytes = run.chain_file.clone();
        bytes[offset] ^= 0x01;
        match verify_chain_bytes(&bytes) {
            Ok(_) => println!("byte {offset}: mutation NOT detected"),
            Err(e) => println!("byte {offset}: {e}"),
        }
    }
    std::fs::remove_file(&file)?;
    Ok(())
}
