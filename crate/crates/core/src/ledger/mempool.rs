use indexmap::IndexMap;
use thiserror::Error;

use crate::crypto::Address;

use super::chain::NonceBook;
use super::tx::Transaction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("a transaction from {sender} with nonce {nonce} is already pending")]
pub struct DuplicatePending {
    pub sender: Address,
    pub nonce: u64,
}

/// Pending transactions in arrival order, unique per `(sender, nonce)`.
#[derive(Debug, Clone, Default)]
pub struct Mempool {
    pending: IndexMap<(Address, u64), Transaction>,
}

impl Mempool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, tx: Transaction) -> Result<(), DuplicatePending> {
        let key = (tx.sender, tx.nonce);
        if self.pending.contains_key(&key) {
            return Err(DuplicatePending { sender: key.0, nonce: key.1 });
        }
        self.pending.insert(key, tx);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transaction> {
        self.pending.values()
    }

    pub fn remove(&mut self, sender: &Address, nonce: u64) -> Option<Transaction> {
        self.pending.shift_remove(&(*sender, nonce))
    }

    /// Drops everything whose nonce is already used on chain.
    pub fn prune_stale(&mut self, nonces: &NonceBook) {
        self.pending.retain(|(sender, nonce), _| *nonce >= nonces.expected(sender));
    }
}
