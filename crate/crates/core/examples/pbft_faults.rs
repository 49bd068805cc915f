//! Runs the same workload through four replicas with each kind of faulty
//! backup, then a faulty primary, and prints what the honest replicas agreed on.
//!
//!     cargo run --example pbft_faults

use moss::consensus::{Behavior, NetworkConfig, SimConfig, Simulation};
use moss::crypto::SigningKey;
use moss::ledger::{FunctionId, Transaction};
use moss::registry::IdentityRegistry;

fn main() {
    let admin = SigningKey::from_seed("admin");
    let mut registry = IdentityRegistry::new(admin.public_key());
    let users: Vec<_> = (0..3).map(|i| SigningKey::from_seed(&format!("user-{i}"))).collect();
    for (i, key) in users.iter().enumerate() {
        registry.register_operator(&admin, &format!("OP{i}"), key.public_key()).unwrap();
    }

    let cases = [
        ("all honest", None),
        ("silent backup", Some((2, Behavior::Silent))),
        ("equivocating backup", Some((1, Behavior::Equivocating))),
        ("corrupting backup", Some((3, Behavior::Corrupting))),
        ("equivocating primary", Some((0, Behavior::Equivocating))),
    ];
    for (label, fault) in cases {
        let config = SimConfig {
            network: NetworkConfig { seed: 7, min_delay: 1, max_delay: 20, lossy_edges: vec![] },
            behaviors: fault.into_iter().collect(),
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(config, registry.clone());
        let mut finished = 0;
        for batch in 0..5u64 {
            for key in &users {
                sim.submit(Transaction::signed(key, FunctionId::RegistrationEnd, vec![], 0, batch, 100 + batch));
            }
            sim.propose(100 + batch).expect("replica 0 proposes");
            if sim.run_until_quiescent(5_000).is_ok() {
                finished += 1;
            }
        }

        let report = sim.audit().expect("honest replicas never disagree");
        let heights: Vec<_> = sim.replicas().iter().map(|r| r.chain().height()).collect();
        let dropped: u64 = sim.replicas().iter().map(|r| r.dropped_messages()).sum();
        println!(
            "{label:<22} batches finished {finished}/5  heights {heights:?}  commits {}  dropped {dropped}  steps {}",
            report.commits,
            sim.stats().steps
        );
    }
}
