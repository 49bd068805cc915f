use std::collections::BTreeSet;

use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::crypto::{Hash32, PublicKey, Signature};

/// Bytes a replica signs when it votes to commit `digest` at `(view, seq)`.
/// Shared with the consensus layer so commit votes double as finality proofs.
pub fn commit_vote_bytes(view: u64, seq: u64, digest: &Hash32, replica: u32) -> Vec<u8> {
    let mut w = Writer::new();
    w.raw(b"moss/pbft/commit/v1").u64(view).u64(seq).put(digest).u32(replica);
    w.finish()
}

/// Largest number of byzantine replicas `n` replicas tolerate.
pub fn max_faulty(n: usize) -> usize {
    n.saturating_sub(1) / 3
}

/// Matching commit votes needed to finalize: `2f + 1`.
pub fn commit_quorum(n: usize) -> usize {
    2 * max_faulty(n) + 1
}

/// Signed commit votes from a quorum of replicas for one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitCertificate {
    pub view: u64,
    pub votes: Vec<(u32, Signature)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("{got} votes, quorum is {needed}")]
    TooFewVotes { got: usize, needed: usize },
    #[error("vote from unknown replica {0}")]
    UnknownReplica(u32),
    #[error("duplicate vote from replica {0}")]
    DuplicateVote(u32),
    #[error("bad signature from replica {0}")]
    BadSignature(u32),
}

impl CommitCertificate {
    pub fn verify(
        &self,
        height: u64,
        digest: &Hash32,
        replica_keys: &[PublicKey],
    ) -> Result<(), CertificateError> {
        let needed = commit_quorum(replica_keys.len());
        if self.votes.len() < needed {
            return Err(CertificateError::TooFewVotes { got: self.votes.len(), needed });
        }
        let mut seen = BTreeSet::new();
        for (replica, signature) in &self.votes {
            let key = replica_keys
                .get(*replica as usize)
                .ok_or(CertificateError::UnknownReplica(*replica))?;
            if !seen.insert(*replica) {
                return Err(CertificateError::DuplicateVote(*replica));
            }
            if !key.verify(&commit_vote_bytes(self.view, height, digest, *replica), signature) {
                return Err(CertificateError::BadSignature(*replica));
            }
        }
        Ok(())
    }
}

impl Encode for CommitCertificate {
    fn encode(&self, w: &mut Writer) {
        w.u64(self.view).len(self.votes.len());
        for (replica, signature) in &self.votes {
            w.u32(*replica).put(signature);
        }
    }
}

impl Decode for CommitCertificate {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let view = r.u64()?;
        let count = r.len()?;
        let votes = (0..count)
            .map(|_| Ok((r.u32()?, r.get()?)))
            .collect::<Result<_, DecodeError>>()?;
        Ok(Self { view, votes })
    }
}
