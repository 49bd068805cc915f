use std::collections::BTreeMap;

use proptest::prelude::*;

use crate::crypto::{Signature, SigningKey};
use crate::ledger::{commit_quorum, max_faulty, FunctionId, Transaction};
use crate::registry::IdentityRegistry;

use super::*;

struct Harness {
    registry: IdentityRegistry,
    users: Vec<SigningKey>,
}

fn harness() -> Harness {
    let admin = SigningKey::from_seed("admin");
    let mut registry = IdentityRegistry::new(admin.public_key());
    let users: Vec<_> = (0..3).map(|i| SigningKey::from_seed(&format!("user-{i}"))).collect();
    for (i, key) in users.iter().enumerate() {
        registry.register_operator(&admin, &format!("OP{i}"), key.public_key()).unwrap();
    }
    Harness { registry, users }
}

fn tx(key: &SigningKey, nonce: u64) -> Transaction {
    Transaction::signed(key, FunctionId::RegistrationEnd, vec![], 0, nonce, 1000 + nonce)
}

fn config(seed: u64, behaviors: &[(u32, Behavior)]) -> SimConfig {
    SimConfig {
        network: NetworkConfig { seed, min_delay: 1, max_delay: 20, lossy_edges: vec![] },
        behaviors: behaviors.iter().copied().collect(),
        ..SimConfig::default()
    }
}

/// Proposes `batches` blocks of three transactions each and runs each to quiescence.
fn drive(sim: &mut Simulation, h: &Harness, batches: u64) -> Result<(), SimError> {
    drive_with_budget(sim, h, batches, 100_000)
}

fn drive_with_budget(sim: &mut Simulation, h: &Harness, batches: u64, budget: u64) -> Result<(), SimError> {
    for b in 0..batches {
        for key in &h.users {
            sim.submit(tx(key, b));
        }
        sim.propose(100 + b).unwrap();
        sim.run_until_quiescent(budget)?;
    }
    Ok(())
}

fn assert_honest_chains_identical(sim: &Simulation, height: u64) {
    let honest = sim.honest_ids();
    let reference = sim.replicas()[*honest.iter().next().unwrap() as usize].chain().digests().to_vec();
    assert_eq!(reference.len() as u64, height);
    for id in honest {
        assert_eq!(sim.replicas()[id as usize].chain().digests(), &reference[..], "replica {id}");
    }
}

fn assert_certificates_verify(sim: &Simulation, id: u32) {
    let keys = sim.replica_keys();
    for (block, cert) in sim.committed(id) {
        cert.verify(block.height, &block.digest(), &keys).unwrap();
    }
}

#[test]
fn honest_four_commit_ten_batches() {
    let h = harness();
    let mut sim = Simulation::new(config(1, &[]), h.registry.clone());
    drive(&mut sim, &h, 10).unwrap();
    assert_honest_chains_identical(&sim, 10);
    assert_eq!(sim.honest_ids().len(), 4);
    assert!(sim.replicas().iter().all(|r| r.mempool().is_empty()));
    assert_eq!(sim.audit().unwrap().commits, 40);
    assert_certificates_verify(&sim, 2);
}

#[test]
fn pipelined_proposals_commit_in_order() {
    let h = harness();
    let mut sim = Simulation::new(config(3, &[]), h.registry.clone());
    for b in 0..5 {
        sim.submit(tx(&h.users[0], b));
        sim.propose(10 + b).unwrap();
    }
    sim.run_until_quiescent(100_000).unwrap();
    assert_honest_chains_identical(&sim, 5);
}

#[test]
fn one_byzantine_backup_of_each_kind() {
    let h = harness();
    for behavior in [Behavior::Silent, Behavior::Equivocating, Behavior::Corrupting] {
        for faulty in 1..4 {
            let mut sim = Simulation::new(config(7, &[(faulty, behavior)]), h.registry.clone());
            drive(&mut sim, &h, 3).unwrap();
            assert_honest_chains_identical(&sim, 3);
            sim.audit().unwrap();
            let honest = *sim.honest_ids().iter().last().unwrap();
            assert_certificates_verify(&sim, honest);
        }
    }
}

#[test]
fn corrupting_replica_messages_are_dropped_and_counted() {
    let h = harness();
    let mut sim = Simulation::new(config(9, &[(3, Behavior::Corrupting)]), h.registry.clone());
    drive(&mut sim, &h, 2).unwrap();
    assert!(sim.replicas()[1].dropped_messages() > 0);
    assert!(sim.trace().iter().any(|e| matches!(e, TraceEvent::Reject { reason: DropReason::BadSignature, .. })));
}

#[test]
fn byzantine_primary_never_splits_honest_replicas() {
    let h = harness();
    for behavior in [Behavior::Silent, Behavior::Equivocating, Behavior::Corrupting] {
        for seed in 0..5 {
            let mut sim = Simulation::new(config(seed, &[(0, behavior)]), h.registry.clone());
            let outcome = drive_with_budget(&mut sim, &h, 2, 3_000);
            sim.audit().unwrap();
            if behavior != Behavior::Equivocating {
                // nobody can commit an invalid or unsent block
                assert!(matches!(outcome, Err(SimError::StepBudgetExhausted { .. })));
            }
        }
    }
}

#[test]
fn two_byzantine_replicas_stay_safe() {
    let h = harness();
    let pairs = [
        (Behavior::Silent, Behavior::Equivocating),
        (Behavior::Equivocating, Behavior::Corrupting),
        (Behavior::Silent, Behavior::Corrupting),
    ];
    for (a, b) in pairs {
        for seed in 0..3 {
            let mut sim = Simulation::new(config(seed, &[(1, a), (2, b)]), h.registry.clone());
            let outcome = drive_with_budget(&mut sim, &h, 2, 3_000);
            sim.audit().unwrap();
            assert!(matches!(outcome, Err(SimError::StepBudgetExhausted { .. })), "{a:?}/{b:?}");
        }
    }
}

#[test]
fn same_seed_gives_identical_trace() {
    let h = harness();
    let run = |seed| {
        let mut sim = Simulation::new(config(seed, &[(2, Behavior::Equivocating)]), h.registry.clone());
        drive(&mut sim, &h, 3).unwrap();
        sim.trace_jsonl()
    };
    assert_eq!(run(42), run(42));
    assert_ne!(run(42), run(43));
}

#[test]
fn lossy_links_recover_by_retransmission() {
    let h = harness();
    let mut cfg = config(5, &[]);
    cfg.network.lossy_edges = vec![
        LossyEdge { from: 0, to: 1, drop_probability: 0.5 },
        LossyEdge { from: 2, to: 1, drop_probability: 0.5 },
        LossyEdge { from: 3, to: 2, drop_probability: 0.3 },
    ];
    let mut sim = Simulation::new(cfg, h.registry.clone());
    drive(&mut sim, &h, 4).unwrap();
    assert_honest_chains_identical(&sim, 4);
    assert!(sim.trace().iter().any(|e| matches!(e, TraceEvent::Drop { .. })));
    assert!(sim.stats().timeouts > 0);
}

#[test]
fn fully_cut_replica_exhausts_budget_without_violations() {
    let h = harness();
    let mut cfg = config(5, &[]);
    cfg.network.lossy_edges =
        (0..4).filter(|i| *i != 1).map(|from| LossyEdge { from, to: 1, drop_probability: 1.0 }).collect();
    let mut sim = Simulation::new(cfg, h.registry.clone());
    sim.submit(tx(&h.users[0], 0));
    sim.propose(10).unwrap();
    assert!(matches!(sim.run_until_quiescent(500), Err(SimError::StepBudgetExhausted { .. })));
    sim.audit().unwrap();
    assert_eq!(sim.replicas()[1].chain().height(), 0);
    assert_eq!(sim.replicas()[2].chain().height(), 1);
}

#[test]
fn propose_rules() {
    let h = harness();
    let keys = replica_public_keys(4);
    let mut backup = Replica::new(1, replica_key(1), keys.clone(), h.registry.clone(), Behavior::Honest);
    assert_eq!(
        backup.propose(vec![tx(&h.users[0], 0)], 10, false).unwrap_err(),
        ProposeError::NotPrimary { replica: 1, view: 0 }
    );

    let mut primary = Replica::new(0, replica_key(0), keys, h.registry.clone(), Behavior::Honest);
    assert_eq!(primary.propose(vec![], 10, false).unwrap_err(), ProposeError::EmptyBatchRejected);
    assert!(primary.propose(vec![], 10, true).is_ok());
    assert!(matches!(primary.propose(vec![], 10, true), Err(ProposeError::StaleTimestamp { .. })));

    let mut forged = tx(&h.users[1], 0);
    forged.signature = Signature([7; 64]);
    let batch = vec![tx(&h.users[0], 0), forged, tx(&h.users[2], 0)];
    let proposal = primary.propose(batch, 11, false).unwrap();
    assert_eq!(proposal.block.transactions.len(), 2);
    assert!(proposal.block.merkle_consistent());
    assert_eq!(proposal.excluded.len(), 1);
    assert_eq!(proposal.outbound.len(), 3);
    assert!(proposal.outbound.iter().all(|e| matches!(e.message, Message::PrePrepare { seq: 1, .. })));
}

#[test]
fn mempool_admission() {
    let h = harness();
    let mut replica = Replica::new(1, replica_key(1), replica_public_keys(4), h.registry.clone(), Behavior::Honest);
    replica.admit(tx(&h.users[0], 0)).unwrap();
    assert!(matches!(replica.admit(tx(&h.users[0], 0)), Err(AdmitError::Duplicate(_))));
    let stranger = SigningKey::from_seed("stranger");
    assert!(matches!(replica.admit(tx(&stranger, 0)), Err(AdmitError::Rejected(_))));
    replica.admit(tx(&h.users[0], 3)).unwrap();
    assert_eq!(replica.mempool().len(), 2);
}

#[test]
fn forged_envelopes_are_rejected() {
    let h = harness();
    let keys = replica_public_keys(4);
    let mut replica = Replica::new(1, replica_key(1), keys, h.registry.clone(), Behavior::Honest);
    let impostor = SigningKey::from_seed("impostor");
    let digest = crate::crypto::sha256(&[b"x"]);
    let forged = Envelope::signed(&impostor, 2, 1, Message::Prepare { view: 0, seq: 0, digest });
    assert_eq!(replica.step(forged).dropped, Some(DropReason::BadSignature));
    let wrong_view = Envelope::signed(&replica_key(2), 2, 1, Message::Prepare { view: 1, seq: 0, digest });
    assert_eq!(replica.step(wrong_view).dropped, Some(DropReason::WrongView));
    assert_eq!(replica.dropped_messages(), 2);
}

#[test]
fn larger_clusters_tolerate_f_silent() {
    let h = harness();
    for n in [7usize, 10] {
        let f = max_faulty(n) as u32;
        let behaviors: BTreeMap<u32, Behavior> = (1..=f).map(|i| (i, Behavior::Silent)).collect();
        let cfg = SimConfig { replicas: n, behaviors, ..config(11, &[]) };
        let mut sim = Simulation::new(cfg, h.registry.clone());
        drive(&mut sim, &h, 2).unwrap();
        assert_honest_chains_identical(&sim, 2);
        for (block, cert) in sim.committed(0) {
            assert_eq!(cert.votes.len(), commit_quorum(n));
            cert.verify(block.height, &block.digest(), &sim.replica_keys()).unwrap();
        }
    }
}

#[test]
fn one_more_silent_replica_than_tolerated_stalls() {
    let h = harness();
    for n in [4usize, 7, 10] {
        let f = max_faulty(n) as u32;
        let behaviors: BTreeMap<u32, Behavior> = (1..=f + 1).map(|i| (i, Behavior::Silent)).collect();
        let cfg = SimConfig { replicas: n, behaviors, ..config(11, &[]) };
        let mut sim = Simulation::new(cfg, h.registry.clone());
        assert!(drive_with_budget(&mut sim, &h, 1, 3_000).is_err(), "n={n}");
        sim.audit().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quorum_arithmetic(n in prop::sample::select(vec![4usize, 7, 10]), extra in 0usize..50) {
        let f = max_faulty(n);
        prop_assert_eq!(f, (n - 1) / 3);
        prop_assert!(n > 3 * f);
        prop_assert_eq!(commit_quorum(n), 2 * f + 1);
        // any two quorums intersect in at least one honest replica
        prop_assert!(2 * commit_quorum(n) > n + f);
        let n2 = n + extra;
        prop_assert!(commit_quorum(n2) <= n2 - max_faulty(n2));
    }

    #[test]
    fn certificate_needs_exactly_quorum_votes(n in prop::sample::select(vec![4usize, 7, 10]), drop_votes in 0usize..4) {
        let keys = replica_public_keys(n);
        let digest = crate::crypto::sha256(&[b"block"]);
        let q = commit_quorum(n);
        let votes: Vec<_> = (0..n as u32)
            .map(|i| (i, replica_key(i).sign(&crate::ledger::commit_vote_bytes(0, 5, &digest, i))))
            .collect();
        let full = crate::ledger::CommitCertificate { view: 0, votes: votes[..q].to_vec() };
        prop_assert!(full.verify(5, &digest, &keys).is_ok());
        let count = q.saturating_sub(drop_votes.max(1));
        let short = crate::ledger::CommitCertificate { view: 0, votes: votes[..count].to_vec() };
        prop_assert!(short.verify(5, &digest, &keys).is_err());
    }
}
