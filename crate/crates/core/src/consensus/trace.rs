use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::crypto::Hash32;

use super::message::MessageKind;
use super::replica::DropReason;

/// One line of the message trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Submit { time: u64, tx: Hash32, admitted: usize },
    Propose { time: u64, replica: u32, seq: u64, digest: Hash32, txs: usize, excluded: usize },
    Send { time: u64, from: u32, to: u32, kind: MessageKind, seq: u64, digest: Hash32, deliver_at: u64 },
    Drop { time: u64, from: u32, to: u32, kind: MessageKind, seq: u64 },
    Deliver { time: u64, from: u32, to: u32, kind: MessageKind, seq: u64, digest: Hash32 },
    Reject { time: u64, replica: u32, from: u32, kind: MessageKind, seq: u64, reason: DropReason },
    Timeout { time: u64 },
    Commit { time: u64, replica: u32, seq: u64, digest: Hash32 },
}

pub fn to_jsonl(trace: &[TraceEvent]) -> String {
    let mut out = String::new();
    for event in trace {
        out.push_str(&serde_json::to_string(event).expect("trace events serialize"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SafetyViolation {
    #[error("replicas {first} and {second} committed different digests at height {seq}")]
    ConflictingCommit { seq: u64, first: u32, second: u32 },
    #[error("replica {replica} committed height {seq} twice")]
    DoubleCommit { seq: u64, replica: u32 },
    #[error("replica {replica} committed height {seq} out of order")]
    OutOfOrder { seq: u64, replica: u32 },
}

/// Summary of a clean audit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SafetyReport {
    pub commits: usize,
    pub heights: BTreeMap<u32, u64>,
}

/// Checks every commit in the trace: honest replicas commit heights in
/// order, each at most once, and never disagree on a digest.
pub fn audit_safety(trace: &[TraceEvent], honest: &BTreeSet<u32>) -> Result<SafetyReport, SafetyViolation> {
    let mut decided: BTreeMap<u64, (u32, Hash32)> = BTreeMap::new();
    let mut report = SafetyReport::default();
    for event in trace {
        let TraceEvent::Commit { replica, seq, digest, .. } = event else { continue };
        if !honest.contains(replica) {
            continue;
        }
        let height = report.heights.entry(*replica).or_insert(0);
        if *seq < *height {
            return Err(SafetyViolation::DoubleCommit { seq: *seq, replica: *replica });
        }
        if *seq > *height {
            return Err(SafetyViolation::OutOfOrder { seq: *seq, replica: *replica });
        }
        *height += 1;
        report.commits += 1;
        match decided.get(seq) {
            Some((first, d)) if d != digest => {
                return Err(SafetyViolation::ConflictingCommit { seq: *seq, first: *first, second: *replica })
            }
            Some(_) => {}
            None => {
                decided.insert(*seq, (*replica, *digest));
            }
        }
    }
    Ok(report)
}
