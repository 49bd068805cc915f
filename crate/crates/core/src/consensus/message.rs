use serde::Serialize;

use crate::codec::{Encode, Writer};
use crate::crypto::{Hash32, PublicKey, Signature, SigningKey};
use crate::ledger::{commit_vote_bytes, Block};

/// PBFT normal-case messages. The sender is carried by the envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    PrePrepare { view: u64, seq: u64, block: Block },
    Prepare { view: u64, seq: u64, digest: Hash32 },
    Commit { view: u64, seq: u64, digest: Hash32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    PrePrepare,
    Prepare,
    Commit,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::PrePrepare { .. } => MessageKind::PrePrepare,
            Message::Prepare { .. } => MessageKind::Prepare,
            Message::Commit { .. } => MessageKind::Commit,
        }
    }

    pub fn view(&self) -> u64 {
        match self {
            Message::PrePrepare { view, .. } | Message::Prepare { view, .. } | Message::Commit { view, .. } => *view,
        }
    }

    pub fn seq(&self) -> u64 {
        match self {
            Message::PrePrepare { seq, .. } | Message::Prepare { seq, .. } | Message::Commit { seq, .. } => *seq,
        }
    }

    /// Block digest the message refers to.
    pub fn digest(&self) -> Hash32 {
        match self {
            Message::PrePrepare { block, .. } => block.digest(),
            Message::Prepare { digest, .. } | Message::Commit { digest, .. } => *digest,
        }
    }

    /// Bytes `from` signs for this message. Commit votes use the same bytes
    /// as commit certificates.
    pub fn signing_bytes(&self, from: u32) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            Message::Commit { view, seq, digest } => return commit_vote_bytes(*view, *seq, digest, from),
            Message::PrePrepare { view, seq, block } => {
                w.raw(b"moss/pbft/pre-prepare/v1").u32(from).u64(*view).u64(*seq);
                block.encode(&mut w);
            }
            Message::Prepare { view, seq, digest } => {
                w.raw(b"moss/pbft/prepare/v1").u32(from).u64(*view).u64(*seq).put(digest);
            }
        }
        w.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub from: u32,
    pub to: u32,
    pub message: Message,
    pub signature: Signature,
}

impl Envelope {
    pub fn signed(key: &SigningKey, from: u32, to: u32, message: Message) -> Self {
        let signature = key.sign(&message.signing_bytes(from));
        Self { from, to, message, signature }
    }

    pub fn verify(&self, key: &PublicKey) -> bool {
        key.verify(&self.message.signing_bytes(self.from), &self.signature)
    }
}
