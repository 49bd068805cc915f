use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{sha256, Hash32, PublicKey, Signature, SigningKey};
use crate::ledger::{
    check_transaction, commit_quorum, max_faulty, Block, Chain, CommitCertificate, DuplicatePending, Mempool,
    Transaction, TxRejection,
};
use crate::registry::IdentityRegistry;

use super::message::{Envelope, Message};

/// The view never changes, so replica 0 is the primary throughout.
pub const VIEW: u64 = 0;

/// How far behind its own head a replica keeps resending old messages.
const RETRANSMIT_WINDOW: u64 = 128;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    #[default]
    Honest,
    /// Never sends anything and ignores everything it receives.
    Silent,
    /// Tells odd-numbered replicas something different from even-numbered ones.
    Equivocating,
    /// Sends validly signed but wrong digests and blocks, and garbles the
    /// signatures on its commit votes.
    Corrupting,
}

impl Behavior {
    pub fn is_honest(self) -> bool {
        self == Behavior::Honest
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProposeError {
    #[error("replica {replica} is not the primary of view {view}")]
    NotPrimary { replica: u32, view: u64 },
    #[error("no valid transactions to propose")]
    EmptyBatchRejected,
    #[error("timestamp {got} does not exceed the head timestamp {head}")]
    StaleTimestamp { head: u64, got: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdmitError {
    #[error(transparent)]
    Rejected(#[from] TxRejection),
    #[error(transparent)]
    Duplicate(#[from] DuplicatePending),
}

/// What `propose` produced.
#[derive(Debug, Clone)]
pub struct Proposal {
    pub block: Block,
    pub digest: Hash32,
    /// Transactions left out of the batch and why.
    pub excluded: Vec<(Hash32, TxRejection)>,
    pub outbound: Vec<Envelope>,
}

/// Why an incoming message was discarded without effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    BadSignature,
    UnknownSender,
    WrongView,
    NotFromPrimary,
    StaleSequence,
    ConflictingProposal,
    InvalidBlock,
    DuplicateVote,
}

#[derive(Debug, Clone, Default)]
pub struct StepOutput {
    pub outbound: Vec<Envelope>,
    /// Blocks finalized by this step, in height order.
    pub committed: Vec<(Block, CommitCertificate)>,
    pub dropped: Option<DropReason>,
}

/// Per-sequence phase log.
#[derive(Debug, Clone, Default)]
struct Slot {
    proposal: Option<Block>,
    accepted: Option<Hash32>,
    invalid: bool,
    prepares: BTreeMap<u32, Hash32>,
    commits: BTreeMap<u32, (Hash32, Signature)>,
    sent_commit: bool,
}

/// One PBFT replica holding its own copy of the chain.
#[derive(Debug, Clone)]
pub struct Replica {
    id: u32,
    key: SigningKey,
    replica_keys: Vec<PublicKey>,
    registry: IdentityRegistry,
    behavior: Behavior,
    chain: Chain,
    certificates: Vec<CommitCertificate>,
    mempool: Mempool,
    slots: BTreeMap<u64, Slot>,
    /// Primary only: the chain extended with proposals not yet committed.
    tentative: Chain,
    sent: BTreeMap<u64, Vec<Envelope>>,
    dropped_messages: u64,
}

impl Replica {
    pub fn new(
        id: u32,
        key: SigningKey,
        replica_keys: Vec<PublicKey>,
        registry: IdentityRegistry,
        behavior: Behavior,
    ) -> Self {
        assert_eq!(replica_keys.get(id as usize), Some(&key.public_key()), "replica key mismatch");
        Self {
            id,
            key,
            replica_keys,
            registry,
            behavior,
            chain: Chain::new(),
            certificates: Vec::new(),
            mempool: Mempool::new(),
            slots: BTreeMap::new(),
            tentative: Chain::new(),
            sent: BTreeMap::new(),
            dropped_messages: 0,
        }
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn behavior(&self) -> Behavior {
        self.behavior
    }

    pub fn n(&self) -> usize {
        self.replica_keys.len()
    }

    pub fn is_primary(&self) -> bool {
        VIEW % self.n() as u64 == self.id as u64
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn certificates(&self) -> &[CommitCertificate] {
        &self.certificates
    }

    pub fn mempool(&self) -> &Mempool {
        &self.mempool
    }

    pub fn registry(&self) -> &IdentityRegistry {
        &self.registry
    }

    /// Malformed or unusable messages received so far.
    pub fn dropped_messages(&self) -> u64 {
        self.dropped_messages
    }

    /// Height the primary will propose next. Equals the chain height on backups.
    pub fn next_sequence(&self) -> u64 {
        self.tentative.height().max(self.chain.height())
    }

    /// Admits a client transaction into the mempool if it is signed by a
    /// registered operator and its nonce is not already used.
    pub fn admit(&mut self, tx: Transaction) -> Result<(), AdmitError> {
        match check_transaction(&tx, &self.registry, self.chain.nonces()) {
            Ok(()) | Err(TxRejection::FutureNonce { .. }) => {}
            Err(rejection) => return Err(rejection.into()),
        }
        self.mempool.insert(tx)?;
        Ok(())
    }

    /// Primary: packs up to `max_batch` pending transactions into a block.
    pub fn propose_from_mempool(
        &mut self,
        timestamp: u64,
        max_batch: usize,
        allow_empty: bool,
    ) -> Result<Proposal, ProposeError> {
        let expected = self.tentative.nonces().clone();
        let candidates: Vec<Transaction> = self
            .mempool
            .iter()
            .filter(|tx| tx.nonce >= expected.expected(&tx.sender))
            .take(max_batch)
            .cloned()
            .collect();
        let proposal = self.propose(candidates, timestamp, allow_empty)?;
        for (digest, rejection) in &proposal.excluded {
            if matches!(rejection, TxRejection::BadSignature | TxRejection::UnknownSender | TxRejection::RevokedSender) {
                let bad: Vec<_> =
                    self.mempool.iter().filter(|tx| tx.digest() == *digest).map(|tx| (tx.sender, tx.nonce)).collect();
                for (sender, nonce) in bad {
                    self.mempool.remove(&sender, nonce);
                }
            }
        }
        Ok(proposal)
    }

    /// Primary: verifies `txs` against the tentative head, drops the invalid
    /// ones, and broadcasts a pre-prepare for the rest.
    pub fn propose(
        &mut self,
        txs: Vec<Transaction>,
        timestamp: u64,
        allow_empty: bool,
    ) -> Result<Proposal, ProposeError> {
        if !self.is_primary() {
            return Err(ProposeError::NotPrimary { replica: self.id, view: VIEW });
        }
        if self.tentative.height() < self.chain.height() {
            self.tentative = self.chain.clone();
        }
        if let Some(head) = self.tentative.head() {
            if timestamp <= head.timestamp {
                return Err(ProposeError::StaleTimestamp { head: head.timestamp, got: timestamp });
            }
        }

        let mut nonces = self.tentative.nonces().clone();
        let mut included = Vec::new();
        let mut excluded = Vec::new();
        for tx in txs {
            match check_transaction(&tx, &self.registry, &nonces) {
                Ok(()) => {
                    nonces.record(tx.sender, tx.nonce);
                    included.push(tx);
                }
                Err(rejection) => excluded.push((tx.digest(), rejection)),
            }
        }
        if included.is_empty() && !allow_empty {
            return Err(ProposeError::EmptyBatchRejected);
        }

        let seq = self.tentative.height();
        let block = Block::new(seq, self.tentative.head_digest(), timestamp, self.id, included);
        let digest = self
            .tentative
            .append_block(block.clone(), &self.registry)
            .expect("proposal was validated transaction by transaction");
        let slot = self.slots.entry(seq).or_default();
        slot.proposal = Some(block.clone());
        slot.accepted = Some(digest);

        let outbound = self.broadcast(Message::PrePrepare { view: VIEW, seq, block: block.clone() });
        Ok(Proposal { block, digest, excluded, outbound })
    }

    /// Handles one incoming message.
    pub fn step(&mut self, envelope: Envelope) -> StepOutput {
        let mut out = StepOutput::default();
        if self.behavior == Behavior::Silent {
            return out;
        }
        if let Err(reason) = self.accept(envelope) {
            self.dropped_messages += 1;
            out.dropped = Some(reason);
            return out;
        }
        self.advance(&mut out);
        out
    }

    /// Everything this replica sent for sequences near its head, for resending
    /// over lossy links.
    pub fn retransmit(&self) -> Vec<Envelope> {
        if self.behavior == Behavior::Silent {
            return Vec::new();
        }
        let floor = self.chain.height().saturating_sub(RETRANSMIT_WINDOW);
        self.sent.range(floor..).flat_map(|(_, envelopes)| envelopes.iter().cloned()).collect()
    }

    fn accept(&mut self, envelope: Envelope) -> Result<(), DropReason> {
        let key = self.replica_keys.get(envelope.from as usize).ok_or(DropReason::UnknownSender)?;
        if !envelope.verify(key) {
            return Err(DropReason::BadSignature);
        }
        if envelope.message.view() != VIEW {
            return Err(DropReason::WrongView);
        }
        let seq = envelope.message.seq();
        if seq < self.chain.height() {
            return Err(DropReason::StaleSequence);
        }
        let from = envelope.from;
        let primary = (VIEW % self.n() as u64) as u32;
        let slot = self.slots.entry(seq).or_default();
        match envelope.message {
            Message::PrePrepare { block, .. } => {
                if from != primary {
                    return Err(DropReason::NotFromPrimary);
                }
                if block.height != seq {
                    return Err(DropReason::InvalidBlock);
                }
                match &slot.proposal {
                    Some(existing) if *existing == block => return Err(DropReason::DuplicateVote),
                    Some(_) => return Err(DropReason::ConflictingProposal),
                    None => slot.proposal = Some(block),
                }
            }
            Message::Prepare { digest, .. } => {
                if from == primary {
                    return Err(DropReason::NotFromPrimary);
                }
                if slot.prepares.contains_key(&from) {
                    return Err(DropReason::DuplicateVote);
                }
                slot.prepares.insert(from, digest);
            }
            Message::Commit { digest, .. } => {
                if slot.commits.contains_key(&from) {
                    return Err(DropReason::DuplicateVote);
                }
                slot.commits.insert(from, (digest, envelope.signature));
            }
        }
        Ok(())
    }

    /// Runs the prepare and commit transitions for the next height, and for
    /// the ones after it while blocks keep committing.
    fn advance(&mut self, out: &mut StepOutput) {
        let f = max_faulty(self.n());
        loop {
            let seq = self.chain.height();
            let Some(slot) = self.slots.get(&seq) else { break };

            if slot.accepted.is_none() && !slot.invalid {
                let Some(block) = slot.proposal.clone() else { break };
                match self.chain.validate_next(&block, &self.registry) {
                    Ok(_) => {
                        let digest = block.digest();
                        let slot = self.slots.get_mut(&seq).expect("slot exists");
                        slot.accepted = Some(digest);
                        slot.prepares.insert(self.id, digest);
                        let prepare = self.broadcast(Message::Prepare { view: VIEW, seq, digest });
                        out.outbound.extend(prepare);
                    }
                    Err(_) => {
                        self.slots.get_mut(&seq).expect("slot exists").invalid = true;
                        self.dropped_messages += 1;
                        out.dropped = Some(DropReason::InvalidBlock);
                    }
                }
            }

            let slot = &self.slots[&seq];
            let Some(digest) = slot.accepted else { break };
            let prepared = slot.prepares.values().filter(|d| **d == digest).count() >= 2 * f;
            if prepared && !slot.sent_commit {
                let signature = self.key.sign(&Message::Commit { view: VIEW, seq, digest }.signing_bytes(self.id));
                let slot = self.slots.get_mut(&seq).expect("slot exists");
                slot.sent_commit = true;
                slot.commits.entry(self.id).or_insert((digest, signature));
                let commit = self.broadcast(Message::Commit { view: VIEW, seq, digest });
                out.outbound.extend(commit);
            }

            let slot = &self.slots[&seq];
            if !slot.sent_commit {
                break;
            }
            let votes: Vec<(u32, Signature)> = slot
                .commits
                .iter()
                .filter(|(_, (d, _))| *d == digest)
                .map(|(replica, (_, signature))| (*replica, *signature))
                .take(commit_quorum(self.n()))
                .collect();
            if votes.len() < commit_quorum(self.n()) {
                break;
            }
            let slot = self.slots.remove(&seq).expect("slot exists");
            let block = slot.proposal.expect("accepted implies a proposal");
            self.chain.append_block(block.clone(), &self.registry).expect("accepted block was validated");
            let certificate = CommitCertificate { view: VIEW, votes };
            self.certificates.push(certificate.clone());
            for tx in &block.transactions {
                self.mempool.remove(&tx.sender, tx.nonce);
            }
            self.mempool.prune_stale(self.chain.nonces());
            let floor = self.chain.height().saturating_sub(RETRANSMIT_WINDOW);
            self.sent = self.sent.split_off(&floor);
            out.committed.push((block, certificate));
        }
    }

    /// Signs `message` for every other replica, applying this replica's
    /// byzantine behavior, and remembers the result for retransmission.
    fn broadcast(&mut self, message: Message) -> Vec<Envelope> {
        if self.behavior == Behavior::Silent {
            return Vec::new();
        }
        let seq = message.seq();
        let envelopes: Vec<Envelope> = (0..self.n() as u32)
            .filter(|to| *to != self.id)
            .map(|to| self.envelope_for(to, &message))
            .collect();
        self.sent.entry(seq).or_default().extend(envelopes.iter().cloned());
        envelopes
    }

    fn envelope_for(&self, to: u32, message: &Message) -> Envelope {
        match self.behavior {
            Behavior::Honest | Behavior::Silent => Envelope::signed(&self.key, self.id, to, message.clone()),
            Behavior::Equivocating if to.is_multiple_of(2) => Envelope::signed(&self.key, self.id, to, message.clone()),
            Behavior::Equivocating => {
                let forged = match message {
                    Message::PrePrepare { view, seq, block } => Message::PrePrepare {
                        view: *view,
                        seq: *seq,
                        block: Block::new(
                            block.height,
                            block.prev_hash,
                            block.timestamp + 1,
                            block.proposer_id,
                            block.transactions.clone(),
                        ),
                    },
                    Message::Prepare { view, seq, digest } => {
                        Message::Prepare { view: *view, seq: *seq, digest: self.fabricate(digest) }
                    }
                    Message::Commit { view, seq, digest } => {
                        Message::Commit { view: *view, seq: *seq, digest: self.fabricate(digest) }
                    }
                };
                Envelope::signed(&self.key, self.id, to, forged)
            }
            Behavior::Corrupting => {
                let flip = |h: &Hash32| {
                    let mut bytes = h.0;
                    bytes[0] ^= 0x01;
                    Hash32(bytes)
                };
                match message {
                    Message::PrePrepare { view, seq, block } => {
                        let mut block = block.clone();
                        block.merkle_root = flip(&block.merkle_root);
                        Envelope::signed(&self.key, self.id, to, Message::PrePrepare { view: *view, seq: *seq, block })
                    }
                    Message::Prepare { view, seq, digest } => Envelope::signed(
                        &self.key,
                        self.id,
                        to,
                        Message::Prepare { view: *view, seq: *seq, digest: flip(digest) },
                    ),
                    Message::Commit { .. } => {
                        let mut envelope = Envelope::signed(&self.key, self.id, to, message.clone());
                        envelope.signature.0[0] ^= 0x01;
                        envelope
                    }
                }
            }
        }
    }

    fn fabricate(&self, digest: &Hash32) -> Hash32 {
        sha256(&[digest.as_bytes(), b"equivocate", &self.id.to_be_bytes()])
    }
}
