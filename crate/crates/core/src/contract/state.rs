use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::crypto::Address;
use crate::gas::WEI_PER_ETHER;
use crate::registry::Role;

use super::events::{Event, EventKind};

/// Minimum wei attached to a registration.
pub const MIN_DEPOSIT_WEI: u128 = WEI_PER_ETHER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Phase {
    Registration,
    AuctionReady,
    Auctioned,
    FreeTrading,
    Cleared,
    Destroyed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Auction,
    FreeMarket,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Order {
    pub owner: Address,
    pub role: Role,
    pub unit_price_gwei: u64,
    pub bandwidth_mhz: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchRecord {
    pub seller: Address,
    pub buyer: Address,
    pub amount_mhz: u64,
    pub unit_price_gwei: u64,
    pub stage: Stage,
    pub total_wei: u128,
}

/// What an operator registered, plus how much of it has traded since.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Registration {
    pub role: Role,
    pub bandwidth_mhz: u64,
    pub unit_price_gwei: u64,
    pub traded_mhz: u64,
}

impl Registration {
    pub fn untraded_mhz(&self) -> u64 {
        self.bandwidth_mhz - self.traded_mhz
    }
}

/// Execution context of one call: `msg.sender`, `msg.value` and the
/// timestamp and height of the containing block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Env {
    pub sender: Address,
    pub value_wei: u128,
    pub now: u64,
    pub block_height: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("caller is not the administrator")]
    NotAdministrator,
    #[error("not allowed in phase {0:?}")]
    WrongPhase(Phase),
    #[error("registration window has closed")]
    RegistrationClosed,
    #[error("deposit must be at least 1 ether")]
    InsufficientDeposit,
    #[error("operator already registered this round")]
    DuplicateRegistration,
    #[error("quantity and price must be positive")]
    ZeroQuantity,
    #[error("order books have not been sorted")]
    BooksUnsorted,
    #[error("the double auction already ran")]
    AlreadyAuctioned,
    #[error("registration window has not closed yet")]
    TooEarly,
    #[error("the free-trading market is closed")]
    MarketClosed,
    #[error("the free-trading market was never opened")]
    MarketNotOpened,
    #[error("no posted seller order at the target address")]
    UnknownTarget,
    #[error("price does not match the seller's posted price")]
    PriceMismatch,
    #[error("buyer deposit cannot cover the trade")]
    BuyerUnderfunded,
    #[error("quantity exceeds what the caller has left to trade")]
    ExceedsRemaining,
    #[error("caller has no open order")]
    NoOrder,
    #[error("caller's order has the other role")]
    WrongRole,
    #[error("operator is not registered")]
    UnknownOperator,
    #[error("caller is not registered")]
    NotRegistered,
    #[error("value must be positive")]
    ZeroValue,
    #[error("Invalid op")]
    InvalidOp,
    #[error("nothing to withdraw")]
    NothingToWithdraw,
    #[error("function does not accept value")]
    NotPayable,
    #[error("contract has been destroyed")]
    Destroyed,
}

impl ContractError {
    /// Stable identifier used in reports and scenario expectations.
    pub fn code(&self) -> &'static str {
        match self {
            ContractError::NotAdministrator => "NotAdministrator",
            ContractError::WrongPhase(_) => "WrongPhase",
            ContractError::RegistrationClosed => "RegistrationClosed",
            ContractError::InsufficientDeposit => "InsufficientDeposit",
            ContractError::DuplicateRegistration => "DuplicateRegistration",
            ContractError::ZeroQuantity => "ZeroQuantity",
            ContractError::BooksUnsorted => "BooksUnsorted",
            ContractError::AlreadyAuctioned => "AlreadyAuctioned",
            ContractError::TooEarly => "TooEarly",
            ContractError::MarketClosed => "MarketClosed",
            ContractError::MarketNotOpened => "MarketNotOpened",
            ContractError::UnknownTarget => "UnknownTarget",
            ContractError::PriceMismatch => "PriceMismatch",
            ContractError::BuyerUnderfunded => "BuyerUnderfunded",
            ContractError::ExceedsRemaining => "ExceedsRemaining",
            ContractError::NoOrder => "NoOrder",
            ContractError::WrongRole => "WrongRole",
            ContractError::UnknownOperator => "UnknownOperator",
            ContractError::NotRegistered => "NotRegistered",
            ContractError::ZeroValue => "ZeroValue",
            ContractError::InvalidOp => "InvalidOp",
            ContractError::NothingToWithdraw => "NothingToWithdraw",
            ContractError::NotPayable => "NotPayable",
            ContractError::Destroyed => "Destroyed",
        }
    }
}

/// Full contract storage for one trading round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractState {
    pub owner: Address,
    pub t0: u64,
    pub t_bid: u64,
    pub t1: Option<u64>,
    pub t_free: u64,
    pub phase: Phase,
    pub asks: Vec<Order>,
    pub bids: Vec<Order>,
    pub asks_sorted: bool,
    pub bids_sorted: bool,
    pub registrations: BTreeMap<Address, Registration>,
    pub deposit: BTreeMap<Address, u128>,
    pub execute_or_not: BTreeMap<Address, bool>,
    pub double_auction_finish: bool,
    pub matches: Vec<MatchRecord>,
    pub events: Vec<Event>,
}

impl ContractState {
    pub fn deploy(env: &Env, administrator: &Address, t_bid: u64, t_free: u64) -> Result<Self, ContractError> {
        if env.sender != *administrator {
            return Err(ContractError::NotAdministrator);
        }
        if env.value_wei != 0 {
            return Err(ContractError::NotPayable);
        }
        Ok(Self {
            owner: env.sender,
            t0: env.now,
            t_bid,
            t1: None,
            t_free,
            phase: Phase::Registration,
            asks: Vec::new(),
            bids: Vec::new(),
            asks_sorted: false,
            bids_sorted: false,
            registrations: BTreeMap::new(),
            deposit: BTreeMap::new(),
            execute_or_not: BTreeMap::new(),
            double_auction_finish: false,
            matches: Vec::new(),
            events: Vec::new(),
        })
    }

    pub fn registration_deadline(&self) -> u64 {
        self.t0.saturating_add(self.t_bid)
    }

    pub fn market_deadline(&self) -> Option<u64> {
        self.t1.map(|t1| t1.saturating_add(self.t_free))
    }

    /// Wei held by the contract on behalf of operators.
    pub fn held_wei(&self) -> u128 {
        self.deposit.values().sum()
    }

    pub fn deposit_of(&self, who: &Address) -> u128 {
        self.deposit.get(who).copied().unwrap_or(0)
    }

    /// Defaults to true; only the administrator's punishment flips it.
    pub fn executes(&self, who: &Address) -> bool {
        self.execute_or_not.get(who).copied().unwrap_or(true)
    }

    pub(super) fn emit(&mut self, env: &Env, kind: EventKind) {
        let log_index = self.events.len() as u64;
        self.events.push(Event { block_height: env.block_height, log_index, kind });
    }

    pub(super) fn ensure_live(&self) -> Result<(), ContractError> {
        if self.phase == Phase::Destroyed {
            Err(ContractError::Destroyed)
        } else {
            Ok(())
        }
    }

    pub(super) fn ensure_owner(&self, env: &Env) -> Result<(), ContractError> {
        self.ensure_live()?;
        if env.sender != self.owner {
            return Err(ContractError::NotAdministrator);
        }
        Ok(())
    }

    pub fn bid_or_ask_submit(
        &mut self,
        env: &Env,
        role: Role,
        bandwidth_mhz: u64,
        unit_price_gwei: u64,
    ) -> Result<(), ContractError> {
        self.ensure_live()?;
        if self.phase != Phase::Registration || env.now > self.registration_deadline() {
            return Err(ContractError::RegistrationClosed);
        }
        if bandwidth_mhz == 0 || unit_price_gwei == 0 {
            return Err(ContractError::ZeroQuantity);
        }
        if env.value_wei < MIN_DEPOSIT_WEI {
            return Err(ContractError::InsufficientDeposit);
        }
        if self.registrations.contains_key(&env.sender) {
            return Err(ContractError::DuplicateRegistration);
        }

        *self.deposit.entry(env.sender).or_default() += env.value_wei;
        let order = Order { owner: env.sender, role, unit_price_gwei, bandwidth_mhz };
        match role {
            Role::Seller => self.asks.push(order),
            Role::Buyer => self.bids.push(order),
        }
        self.registrations
            .insert(env.sender, Registration { role, bandwidth_mhz, unit_price_gwei, traded_mhz: 0 });
        self.emit(
            env,
            EventKind::LogRegisterOp { address: env.sender, role, bandwidth_mhz, unit_price_gwei },
        );
        Ok(())
    }

    /// True once `now` is past the registration window (the window is
    /// closed on both ends). The first true observation opens the auction.
    pub fn registration_end(&mut self, env: &Env) -> Result<bool, ContractError> {
        self.ensure_live()?;
        let ended = env.now > self.registration_deadline();
        if ended && self.phase == Phase::Registration {
            self.phase = Phase::AuctionReady;
        }
        Ok(ended)
    }

    pub fn sort_ask_by_increase(&mut self, env: &Env) -> Result<(), ContractError> {
        self.ensure_owner(env)?;
        if self.phase != Phase::AuctionReady {
            return Err(ContractError::WrongPhase(self.phase));
        }
        // stable: equal prices keep submission order
        self.asks.sort_by_key(|o| o.unit_price_gwei);
        self.asks_sorted = true;
        Ok(())
    }

    pub fn sort_bid_by_decrease(&mut self, env: &Env) -> Result<(), ContractError> {
        self.ensure_owner(env)?;
        if self.phase != Phase::AuctionReady {
            return Err(ContractError::WrongPhase(self.phase));
        }
        self.bids.sort_by_key(|o| std::cmp::Reverse(o.unit_price_gwei));
        self.bids_sorted = true;
        Ok(())
    }

    pub fn free_trade_begin(&mut self, env: &Env) -> Result<(), ContractError> {
        self.ensure_owner(env)?;
        if self.phase != Phase::Auctioned {
            return Err(ContractError::WrongPhase(self.phase));
        }
        if env.now <= self.registration_deadline() {
            return Err(ContractError::TooEarly);
        }
        self.t1 = Some(env.now);
        self.phase = Phase::FreeTrading;
        Ok(())
    }

    /// True once `now` is past the free-trading window. The first true
    /// observation clears the round.
    pub fn market_end(&mut self, env: &Env) -> Result<bool, ContractError> {
        self.ensure_live()?;
        let deadline = self.market_deadline().ok_or(ContractError::MarketNotOpened)?;
        let ended = env.now > deadline;
        if ended && self.phase == Phase::FreeTrading {
            self.phase = Phase::Cleared;
        }
        Ok(ended)
    }

    pub fn pay_or_not(&mut self, env: &Env, operator: &Address, executed: bool) -> Result<(), ContractError> {
        self.ensure_owner(env)?;
        if !self.registrations.contains_key(operator) {
            return Err(ContractError::UnknownOperator);
        }
        self.execute_or_not.insert(*operator, executed);
        Ok(())
    }

    pub fn increase_funds(&mut self, env: &Env) -> Result<(), ContractError> {
        self.ensure_live()?;
        if !self.registrations.contains_key(&env.sender) {
            return Err(ContractError::NotRegistered);
        }
        if env.value_wei == 0 {
            return Err(ContractError::ZeroValue);
        }
        *self.deposit.entry(env.sender).or_default() += env.value_wei;
        Ok(())
    }

    /// Pays out the caller's whole remaining deposit.
    pub fn withdraw(&mut self, env: &Env) -> Result<u128, ContractError> {
        self.ensure_live()?;
        if self.phase != Phase::Cleared {
            return Err(ContractError::WrongPhase(self.phase));
        }
        if !self.executes(&env.sender) {
            return Err(ContractError::InvalidOp);
        }
        let amount = self.deposit_of(&env.sender);
        if amount == 0 {
            return Err(ContractError::NothingToWithdraw);
        }
        self.deposit.remove(&env.sender);
        Ok(amount)
    }

    pub fn change_owner(&mut self, env: &Env, new_owner: &Address) -> Result<(), ContractError> {
        self.ensure_owner(env)?;
        self.owner = *new_owner;
        Ok(())
    }

    /// Refunds operators in good standing, forfeits flagged deposits to the
    /// owner, and disables the contract. Returns the payouts.
    pub fn self_destruct(&mut self, env: &Env) -> Result<Vec<(Address, u128)>, ContractError> {
        self.ensure_owner(env)?;
        if self.phase != Phase::Cleared {
            return Err(ContractError::WrongPhase(self.phase));
        }
        let payouts = std::mem::take(&mut self.deposit)
            .into_iter()
            .filter(|(_, amount)| *amount > 0)
            .map(|(who, amount)| if self.executes(&who) { (who, amount) } else { (self.owner, amount) })
            .collect();
        self.phase = Phase::Destroyed;
        Ok(payouts)
    }
}
