//! Hash-chained block store.

mod block;
mod certificate;
mod chain;
mod mempool;
mod merkle;
pub mod store;
mod tx;

pub use block::{compute_merkle_root, Block};
pub use certificate::{commit_quorum, commit_vote_bytes, max_faulty, CertificateError, CommitCertificate};
pub use chain::{check_transaction, verify_transaction, Chain, LedgerError, NonceBook, TxRejection};
pub use mempool::{DuplicatePending, Mempool};
pub use merkle::merkle_root;
pub use tx::{FunctionId, Transaction};
