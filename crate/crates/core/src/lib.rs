//! Spectrum sharing among mobile network operators on a permissioned ledger.
//!
//! The crate is organised bottom-up:
//!
//! * [`crypto`] and [`codec`]: SHA-256, Ed25519 and the canonical byte encoding.
//! * [`registry`]: the administrator's certificate authority.
//! * [`ledger`]: transactions, merkle-rooted blocks, the hash chain, the
//!   mempool and the on-disk chain format.
//! * [`consensus`]: PBFT (pre-prepare / prepare / commit) over a seeded,
//!   fault-injecting simulated network.
//! * [`contract`]: the trading contract (registration, double auction, free
//!   market, clearing and punishment) and the [`contract::World`] that
//!   applies committed transactions with fees.
//! * [`gas`]: the per-function gas schedule and ether conversion.
//! * [`oracle`]: an independent reference matcher for the double auction.
//! * [`scenario`]: scenario files, the end-to-end runner, settlement reports
//!   and chain verification.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod codec;
pub mod consensus;
pub mod contract;
pub mod crypto;
pub mod gas;
pub mod ledger;
pub mod oracle;
pub mod registry;
pub mod scenario;
