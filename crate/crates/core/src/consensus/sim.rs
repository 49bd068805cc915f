use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{PublicKey, SigningKey};
use crate::ledger::{Block, CommitCertificate, Transaction};
use crate::registry::IdentityRegistry;

use super::message::Envelope;
use super::network::{NetworkConfig, SendOutcome, SimNetwork};
use super::replica::{Behavior, Proposal, ProposeError, Replica, StepOutput};
use super::trace::{audit_safety, to_jsonl, SafetyReport, SafetyViolation, TraceEvent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub replicas: usize,
    pub network: NetworkConfig,
    pub max_batch: usize,
    pub allow_empty: bool,
    /// Clock advance when the network is idle but some honest replica is
    /// still behind; every replica then resends its recent messages.
    pub retransmit_interval: u64,
    pub behaviors: BTreeMap<u32, Behavior>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            replicas: 4,
            network: NetworkConfig::default(),
            max_batch: 64,
            allow_empty: false,
            retransmit_interval: 50,
            behaviors: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("step budget of {max_steps} exhausted with honest replicas at heights {heights:?}, target {target}")]
    StepBudgetExhausted { max_steps: u64, target: u64, heights: Vec<u64> },
    #[error("max_steps must be positive")]
    ZeroStepBudget,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub steps: u64,
    pub deliveries: u64,
    pub timeouts: u64,
}

/// Key for replica `i`, derived from a fixed seed string.
pub fn replica_key(i: u32) -> SigningKey {
    SigningKey::from_seed(&format!("replica-{i}"))
}

pub fn replica_public_keys(n: usize) -> Vec<PublicKey> {
    (0..n as u32).map(|i| replica_key(i).public_key()).collect()
}

/// `n` replicas and a seeded network driven by one single-threaded loop.
pub struct Simulation {
    config: SimConfig,
    replicas: Vec<Replica>,
    net: SimNetwork,
    trace: Vec<TraceEvent>,
    stats: RunStats,
}

impl Simulation {
    pub fn new(config: SimConfig, registry: IdentityRegistry) -> Self {
        assert!(config.replicas > 0, "need at least one replica");
        let keys = replica_public_keys(config.replicas);
        let replicas = (0..config.replicas as u32)
            .map(|i| {
                let behavior = config.behaviors.get(&i).copied().unwrap_or_default();
                Replica::new(i, replica_key(i), keys.clone(), registry.clone(), behavior)
            })
            .collect();
        let net = SimNetwork::new(&config.network);
        Self { config, replicas, net, trace: Vec::new(), stats: RunStats::default() }
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn replicas(&self) -> &[Replica] {
        &self.replicas
    }

    pub fn replica_keys(&self) -> Vec<PublicKey> {
        replica_public_keys(self.config.replicas)
    }

    pub fn honest_ids(&self) -> BTreeSet<u32> {
        self.replicas.iter().filter(|r| r.behavior().is_honest()).map(Replica::id).collect()
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn trace_jsonl(&self) -> String {
        to_jsonl(&self.trace)
    }

    pub fn stats(&self) -> RunStats {
        self.stats
    }

    pub fn audit(&self) -> Result<SafetyReport, SafetyViolation> {
        audit_safety(&self.trace, &self.honest_ids())
    }

    /// Committed blocks with certificates at replica `id`.
    pub fn committed(&self, id: u32) -> impl Iterator<Item = (&Block, &CommitCertificate)> {
        let replica = &self.replicas[id as usize];
        replica.chain().blocks().iter().zip(replica.certificates())
    }

    /// A client broadcasts `tx` to every replica. Returns how many admitted it.
    pub fn submit(&mut self, tx: Transaction) -> usize {
        let digest = tx.digest();
        let admitted = self.replicas.iter_mut().map(|r| r.admit(tx.clone())).filter(Result::is_ok).count();
        self.trace.push(TraceEvent::Submit { time: self.net.now(), tx: digest, admitted });
        admitted
    }

    /// The primary drains its mempool into a block stamped `timestamp`.
    pub fn propose(&mut self, timestamp: u64) -> Result<Proposal, ProposeError> {
        let (max_batch, allow_empty) = (self.config.max_batch, self.config.allow_empty);
        let proposal = self.primary_mut().propose_from_mempool(timestamp, max_batch, allow_empty)?;
        self.after_propose(&proposal);
        Ok(proposal)
    }

    /// The primary proposes exactly `txs` (minus invalid ones).
    pub fn propose_batch(&mut self, txs: Vec<Transaction>, timestamp: u64) -> Result<Proposal, ProposeError> {
        let allow_empty = self.config.allow_empty;
        let proposal = self.primary_mut().propose(txs, timestamp, allow_empty)?;
        self.after_propose(&proposal);
        Ok(proposal)
    }

    fn primary_mut(&mut self) -> &mut Replica {
        let n = self.replicas.len() as u64;
        &mut self.replicas[(super::replica::VIEW % n) as usize]
    }

    fn after_propose(&mut self, proposal: &Proposal) {
        self.trace.push(TraceEvent::Propose {
            time: self.net.now(),
            replica: proposal.block.proposer_id,
            seq: proposal.block.height,
            digest: proposal.digest,
            txs: proposal.block.transactions.len(),
            excluded: proposal.excluded.len(),
        });
        for envelope in proposal.outbound.clone() {
            self.send(envelope);
        }
    }

    fn send(&mut self, envelope: Envelope) {
        let (from, to, kind, seq, digest) = (
            envelope.from,
            envelope.to,
            envelope.message.kind(),
            envelope.message.seq(),
            envelope.message.digest(),
        );
        let time = self.net.now();
        match self.net.send(envelope) {
            SendOutcome::Scheduled { deliver_at } => {
                self.trace.push(TraceEvent::Send { time, from, to, kind, seq, digest, deliver_at })
            }
            SendOutcome::Dropped => self.trace.push(TraceEvent::Drop { time, from, to, kind, seq }),
        }
    }

    /// Height every honest replica should reach: everything the primary has proposed.
    fn target_height(&self) -> u64 {
        self.replicas.iter().map(Replica::next_sequence).max().unwrap_or(0)
    }

    fn honest_behind(&self, target: u64) -> bool {
        self.replicas.iter().any(|r| r.behavior().is_honest() && r.chain().height() < target)
    }

    /// Delivers messages until the network is idle and every honest replica
    /// has committed every proposed block. Deliveries and retransmission
    /// timeouts each count as one step.
    pub fn run_until_quiescent(&mut self, max_steps: u64) -> Result<RunStats, SimError> {
        if max_steps == 0 {
            return Err(SimError::ZeroStepBudget);
        }
        let mut run = RunStats::default();
        loop {
            let target = self.target_height();
            if self.net.is_idle() && !self.honest_behind(target) {
                return Ok(run);
            }
            if run.steps >= max_steps {
                return Err(SimError::StepBudgetExhausted {
                    max_steps,
                    target,
                    heights: self
                        .replicas
                        .iter()
                        .filter(|r| r.behavior().is_honest())
                        .map(|r| r.chain().height())
                        .collect(),
                });
            }
            run.steps += 1;
            self.stats.steps += 1;

            if let Some(envelope) = self.net.next_delivery() {
                run.deliveries += 1;
                self.stats.deliveries += 1;
                self.deliver(envelope);
            } else {
                run.timeouts += 1;
                self.stats.timeouts += 1;
                self.net.advance(self.config.retransmit_interval);
                self.trace.push(TraceEvent::Timeout { time: self.net.now() });
                let resend: Vec<Envelope> = self.replicas.iter().flat_map(Replica::retransmit).collect();
                for envelope in resend {
                    self.send(envelope);
                }
            }
        }
    }

    fn deliver(&mut self, envelope: Envelope) {
        let time = self.net.now();
        let (from, to, kind, seq) = (envelope.from, envelope.to, envelope.message.kind(), envelope.message.seq());
        self.trace.push(TraceEvent::Deliver { time, from, to, kind, seq, digest: envelope.message.digest() });
        let StepOutput { outbound, committed, dropped } = self.replicas[to as usize].step(envelope);
        if let Some(reason) = dropped {
            self.trace.push(TraceEvent::Reject { time, replica: to, from, kind, seq, reason });
        }
        for (block, _) in &committed {
            self.trace.push(TraceEvent::Commit { time, replica: to, seq: block.height, digest: block.digest() });
        }
        for envelope in outbound {
            self.send(envelope);
        }
    }
}
