use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::crypto::{sha256, Hash32};

use super::merkle::merkle_root;
use super::tx::Transaction;

/// A batch of transactions linked to its parent by hash.
///
/// The block id is the hash of the header fields (`height | prev_hash |
/// merkle_root | timestamp | proposer_id`); transactions are bound to it
/// through the merkle root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub height: u64,
    pub prev_hash: Hash32,
    pub merkle_root: Hash32,
    pub timestamp: u64,
    pub proposer_id: u32,
    pub transactions: Vec<Transaction>,
}

impl Block {
    pub fn new(
        height: u64,
        prev_hash: Hash32,
        timestamp: u64,
        proposer_id: u32,
        transactions: Vec<Transaction>,
    ) -> Self {
        let merkle_root = compute_merkle_root(&transactions);
        Self { height, prev_hash, merkle_root, timestamp, proposer_id, transactions }
    }

    fn encode_header(&self, w: &mut Writer) {
        w.u64(self.height)
            .put(&self.prev_hash)
            .put(&self.merkle_root)
            .u64(self.timestamp)
            .u32(self.proposer_id);
    }

    pub fn digest(&self) -> Hash32 {
        let mut w = Writer::new();
        w.raw(b"moss/block/v1");
        self.encode_header(&mut w);
        sha256(&[&w.finish()])
    }

    pub fn merkle_consistent(&self) -> bool {
        compute_merkle_root(&self.transactions) == self.merkle_root
    }
}

pub fn compute_merkle_root(transactions: &[Transaction]) -> Hash32 {
    let leaves: Vec<Hash32> = transactions.iter().map(Transaction::digest).collect();
    merkle_root(&leaves)
}

impl Encode for Block {
    fn encode(&self, w: &mut Writer) {
        self.encode_header(w);
        w.seq(&self.transactions);
    }
}

impl Decode for Block {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            height: r.u64()?,
            prev_hash: r.get()?,
            merkle_root: r.get()?,
            timestamp: r.u64()?,
            proposer_id: r.u32()?,
            transactions: r.seq()?,
        })
    }
}
