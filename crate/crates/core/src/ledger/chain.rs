use std::collections::BTreeMap;

use thiserror::Error;

use crate::crypto::{Address, Hash32};
use crate::registry::IdentityRegistry;

use super::block::Block;
use super::tx::Transaction;

/// Why a single transaction is not acceptable at the current chain position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TxRejection {
    #[error("sender is not a registered member")]
    UnknownSender,
    #[error("sender has been revoked")]
    RevokedSender,
    #[error("signature does not verify")]
    BadSignature,
    #[error("nonce {got} is stale, expected {expected}")]
    StaleNonce { expected: u64, got: u64 },
    #[error("nonce {got} skips ahead, expected {expected}")]
    FutureNonce { expected: u64, got: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("block {height}: prev_hash does not match the current head")]
    BadLinkage { height: u64 },
    #[error("block height {got}, expected {expected}")]
    BadHeight { expected: u64, got: u64 },
    #[error("block {height}: merkle root does not match its transactions")]
    BadMerkleRoot { height: u64 },
    #[error("block {height}: transaction {index} has a bad signature")]
    BadSignature { height: u64, index: usize },
    #[error("block {height}: transaction {index} rejected: {reason}")]
    RejectedTransaction { height: u64, index: usize, reason: TxRejection },
    #[error("block {height}: timestamp {got} does not exceed parent timestamp {parent}")]
    NonMonotoneTimestamp { height: u64, parent: u64, got: u64 },
}

/// Next expected nonce per sender.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NonceBook {
    next: BTreeMap<Address, u64>,
}

impl NonceBook {
    pub fn expected(&self, sender: &Address) -> u64 {
        self.next.get(sender).copied().unwrap_or(0)
    }

    pub fn record(&mut self, sender: Address, nonce: u64) {
        self.next.insert(sender, nonce + 1);
    }
}

/// Full admission check for a transaction against membership and nonces.
pub fn check_transaction(
    tx: &Transaction,
    registry: &IdentityRegistry,
    nonces: &NonceBook,
) -> Result<(), TxRejection> {
    if registry.is_revoked(&tx.sender) {
        return Err(TxRejection::RevokedSender);
    }
    let key = registry.member_key(&tx.sender).ok_or(TxRejection::UnknownSender)?;
    if !tx.verify_signature(key) {
        return Err(TxRejection::BadSignature);
    }
    let expected = nonces.expected(&tx.sender);
    match tx.nonce.cmp(&expected) {
        std::cmp::Ordering::Less => Err(TxRejection::StaleNonce { expected, got: tx.nonce }),
        std::cmp::Ordering::Greater => Err(TxRejection::FutureNonce { expected, got: tx.nonce }),
        std::cmp::Ordering::Equal => Ok(()),
    }
}

pub fn verify_transaction(tx: &Transaction, registry: &IdentityRegistry, nonces: &NonceBook) -> bool {
    check_transaction(tx, registry, nonces).is_ok()
}

/// Append-only, hash-linked sequence of blocks. Height 0 is the genesis block
/// and carries an all-zero `prev_hash`.
#[derive(Debug, Clone, Default)]
pub struct Chain {
    blocks: Vec<Block>,
    digests: Vec<Hash32>,
    nonces: NonceBook,
}

impl Chain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of blocks, which is also the height of the next block.
    pub fn height(&self) -> u64 {
        self.blocks.len() as u64
    }

    pub fn head(&self) -> Option<&Block> {
        self.blocks.last()
    }

    pub fn head_digest(&self) -> Hash32 {
        self.digests.last().copied().unwrap_or(Hash32::ZERO)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn digests(&self) -> &[Hash32] {
        &self.digests
    }

    pub fn nonces(&self) -> &NonceBook {
        &self.nonces
    }

    /// Checks `block` as the next block without appending it. Returns the
    /// nonce book as it would be after the block.
    pub fn validate_next(&self, block: &Block, registry: &IdentityRegistry) -> Result<NonceBook, LedgerError> {
        let height = self.height();
        if block.height != height {
            return Err(LedgerError::BadHeight { expected: height, got: block.height });
        }
        if block.prev_hash != self.head_digest() {
            return Err(LedgerError::BadLinkage { height });
        }
        if let Some(parent) = self.head() {
            if block.timestamp <= parent.timestamp {
                return Err(LedgerError::NonMonotoneTimestamp {
                    height,
                    parent: parent.timestamp,
                    got: block.timestamp,
                });
            }
        }
        if !block.merkle_consistent() {
            return Err(LedgerError::BadMerkleRoot { height });
        }
        let mut nonces = self.nonces.clone();
        for (index, tx) in block.transactions.iter().enumerate() {
            match check_transaction(tx, registry, &nonces) {
                Ok(()) => nonces.record(tx.sender, tx.nonce),
                Err(TxRejection::BadSignature) => return Err(LedgerError::BadSignature { height, index }),
                Err(reason) => return Err(LedgerError::RejectedTransaction { height, index, reason }),
            }
        }
        Ok(nonces)
    }

    pub fn append_block(&mut self, block: Block, registry: &IdentityRegistry) -> Result<Hash32, LedgerError> {
        self.nonces = self.validate_next(&block, registry)?;
        let digest = block.digest();
        self.blocks.push(block);
        self.digests.push(digest);
        Ok(digest)
    }
}
