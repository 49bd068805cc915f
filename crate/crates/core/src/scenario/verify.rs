use std::path::Path;

use thiserror::Error;

use crate::codec::Decode;
use crate::contract::World;
use crate::crypto::Hash32;
use crate::ledger::store::{decode_chain_file, StoreError};
use crate::ledger::Chain;

use super::genesis::Genesis;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("corrupt chain file: {0}")]
    CorruptFile(String),
    #[error("verification failed at block {height}: {reason}")]
    VerificationFailed { height: u64, reason: String },
}

impl From<StoreError> for VerifyError {
    fn from(e: StoreError) -> Self {
        VerifyError::CorruptFile(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Verified {
    pub name: String,
    pub blocks: u64,
    pub head_digest: Hash32,
    pub state_digest: Hash32,
    pub world: World,
}

pub fn verify_chain_file(path: &Path) -> Result<Verified, VerifyError> {
    let bytes = std::fs::read(path).map_err(|e| VerifyError::CorruptFile(format!("{}: {e}", path.display())))?;
    verify_chain_bytes(&bytes)
}

/// Decodes the file, checks every block's commit certificate, linkage,
/// merkle root, signatures and nonces, and replays the contract from the
/// genesis header. Hash-only checks run over the whole file before any
/// signature is verified, so most corruption is reported cheaply.
pub fn verify_chain_bytes(bytes: &[u8]) -> Result<Verified, VerifyError> {
    let file = decode_chain_file(bytes)?;
    let genesis = Genesis::from_bytes(&file.header).map_err(|e| VerifyError::CorruptFile(format!("genesis: {e}")))?;

    let mut prev = Hash32::ZERO;
    for (height, record) in file.records.iter().enumerate() {
        let height = height as u64;
        let fail = |reason: &str| VerifyError::VerificationFailed { height, reason: reason.into() };
        if record.block.height != height {
            return Err(fail("height out of sequence"));
        }
        if record.block.prev_hash != prev {
            return Err(fail("previous-block hash does not link"));
        }
        if !record.block.merkle_consistent() {
            return Err(fail("merkle root does not match its transactions"));
        }
        prev = record.block.digest();
    }
    for record in &file.records {
        let height = record.block.height;
        record
            .certificate
            .verify(height, &record.block.digest(), &genesis.replica_keys)
            .map_err(|e| VerifyError::VerificationFailed { height, reason: format!("commit certificate: {e}") })?;
    }

    let registry = genesis
        .registry()
        .map_err(|e| VerifyError::VerificationFailed { height: 0, reason: format!("genesis registry: {e}") })?;
    let mut chain = Chain::new();
    let mut world = genesis.world();
    let total = world.total_wei();
    for record in &file.records {
        let height = chain.height();
        let fail = |reason: String| VerifyError::VerificationFailed { height, reason };
        chain.append_block(record.block.clone(), &registry).map_err(|e| fail(e.to_string()))?;
        world.apply_block(&record.block);
        if world.total_wei() != total {
            return Err(fail("wei not conserved".into()));
        }
    }

    Ok(Verified {
        name: genesis.name,
        blocks: chain.height(),
        head_digest: chain.head_digest(),
        state_digest: world.state_digest(),
        world,
    })
}
