//! PBFT normal-case operation (pre-prepare, prepare, commit) over a seeded
//! simulated network.
//!
//! The view is fixed at 0, so replica 0 is always the primary and there is no
//! view change: a faulty primary stalls the run, which surfaces as
//! [`SimError::StepBudgetExhausted`]. A block at height `h` is sequence `h`.
//! Backups validate a pre-prepare against their own chain head before
//! preparing it, prepare quorum is `2f` matching prepares, and a replica
//! commits after `2f + 1` matching commit votes. Those commit votes are
//! signed over the same bytes as [`crate::ledger::CommitCertificate`], so the
//! votes that finalized a block are also its stored proof of finality.

mod message;
mod network;
mod replica;
mod sim;
mod trace;

pub use message::{Envelope, Message, MessageKind};
pub use network::{LossyEdge, NetworkConfig, SendOutcome, SimNetwork};
pub use replica::{AdmitError, Behavior, DropReason, Proposal, ProposeError, Replica, StepOutput, VIEW};
pub use sim::{replica_key, replica_public_keys, RunStats, SimConfig, SimError, Simulation};
pub use trace::{audit_safety, to_jsonl, SafetyReport, SafetyViolation, TraceEvent};

#[cfg(test)]
mod tests;
