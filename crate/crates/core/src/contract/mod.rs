//! The spectrum-trading contract as a deterministic state machine.
//!
//! A round moves through `Registration -> AuctionReady -> Auctioned ->
//! FreeTrading -> Cleared -> Destroyed`. Operators register an ask or bid
//! with a deposit, the administrator sorts the books and runs the double
//! auction, unmatched operators trade bilaterally in the free market, and the
//! round is settled by withdrawals gated on the administrator's
//! `execute_or_not` flag.
//!
//! Every operation validates before it mutates, so a call that returns an
//! error leaves the state untouched.

mod auction;
mod call;
mod events;
mod executor;
mod market;
mod state;

pub use call::{gas_key_for, Call};
pub use events::{Event, EventKind};
pub use executor::{CallOutput, ExecError, Receipt, World};
pub use state::{
    ContractError, ContractState, Env, MatchRecord, Order, Phase, Registration, Stage, MIN_DEPOSIT_WEI,
};

#[cfg(test)]
mod tests;
