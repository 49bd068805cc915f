//! Scenario files and the end-to-end pipeline: register operators, deploy,
//! run the script through PBFT, execute committed blocks on the contract,
//! audit conservation and safety, and persist a verifiable chain file.
//!
//! A scenario is a TOML file:
//!
//! ```toml
//! version = 1
//! name = "example"
//!
//! [admin]
//! key_seed = "admin"
//!
//! [[operators]]
//! id = "OP1"
//! role = "seller"
//! key_seed = "op1"
//! bandwidth_mhz = 20
//! unit_price_gwei = 2000000
//! total_bandwidth_mhz = 40
//! required_bandwidth_mhz = 15
//!
//! [timing]        # absolute logical seconds
//! t0 = 1000
//! t_bid = 600
//! t1 = 1700
//! t_free = 600
//! tb = 2400
//! te = 3000
//!
//! [consensus]     # all optional
//! replicas = 4
//! seed = 42
//! faults = [{ replica = 2, behavior = "silent" }]
//!
//! [gas]           # optional
//! price_gwei = "4.3"
//!
//! [[script]]
//! at = 1010
//! actor = "OP1"
//! action = "submit"
//! ```
//!
//! The contract is deployed by the administrator at `t0` in block 0. Script
//! steps with the same `at` share a block whose timestamp is `at`. A step
//! may carry `expect = "<code>"` when it is meant to revert.

mod config;
pub mod fuzz;
mod genesis;
mod report;
mod runner;
mod verify;

pub use config::{
    Action, AdminConfig, ConsensusConfig, Fault, GasConfig, OperatorConfig, ScenarioConfig, Step, Timing, ADMIN,
    CONFIG_VERSION,
};
pub use genesis::Genesis;
pub use report::{
    events_jsonl, format_eth, tx_log, tx_log_jsonl, tx_log_text, BalanceRow, MatchRow, RejectionRow,
    SettlementReport, TxLogLine,
};
pub use runner::{run_scenario, RunOptions, ScenarioError, ScenarioRun, StepRecord};
pub use verify::{verify_chain_bytes, verify_chain_file, Verified, VerifyError};
