use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::crypto::{sha256, Address, Hash32};
use crate::gas::{charge, GasError, GasSchedule};
use crate::ledger::{Block, FunctionId, Transaction};

use super::call::{gas_key_for, Call};
use super::state::{ContractError, ContractState, Env};

/// Why a committed transaction had no effect beyond (possibly) its fee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("fee of {fee} wei exceeds balance of {balance} wei")]
    FeeUnpayable { fee: u128, balance: u128 },
    #[error("attached value exceeds balance")]
    InsufficientBalance,
    #[error("payload does not decode")]
    MalformedPayload,
    #[error("contract is not deployed")]
    NotDeployed,
    #[error("contract is already deployed")]
    AlreadyDeployed,
    #[error(transparent)]
    Contract(#[from] ContractError),
}

impl ExecError {
    pub fn code(&self) -> &'static str {
        match self {
            ExecError::FeeUnpayable { .. } => "FeeUnpayable",
            ExecError::InsufficientBalance => "InsufficientBalance",
            ExecError::MalformedPayload => "MalformedPayload",
            ExecError::NotDeployed => "NotDeployed",
            ExecError::AlreadyDeployed => "AlreadyDeployed",
            ExecError::Contract(e) => e.code(),
        }
    }
}

/// Return value of a successful call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CallOutput {
    Unit,
    Flag(bool),
    Paid(u128),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt {
    pub block_height: u64,
    pub tx_index: usize,
    pub tx_digest: Hash32,
    pub sender: Address,
    pub function_id: FunctionId,
    pub gas_used: u64,
    pub fee_wei: u128,
    pub result: Result<CallOutput, ExecError>,
}

/// Everything transactions can change: external balances, collected fees and
/// the contract. Fees go to a sink rather than to block proposers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct World {
    pub administrator: Address,
    pub balances: BTreeMap<Address, u128>,
    pub fees_collected: u128,
    pub contract: Option<ContractState>,
    #[serde(skip)]
    pub schedule: GasSchedule,
}

impl World {
    pub fn new(administrator: Address, balances: BTreeMap<Address, u128>, schedule: GasSchedule) -> Self {
        Self { administrator, balances, fees_collected: 0, contract: None, schedule }
    }

    pub fn balance(&self, who: &Address) -> u128 {
        self.balances.get(who).copied().unwrap_or(0)
    }

    pub fn contract_held_wei(&self) -> u128 {
        self.contract.as_ref().map_or(0, ContractState::held_wei)
    }

    /// External balances + contract-held wei + collected fees. Constant
    /// across any sequence of transactions.
    pub fn total_wei(&self) -> u128 {
        self.balances.values().sum::<u128>() + self.contract_held_wei() + self.fees_collected
    }

    pub fn state_digest(&self) -> Hash32 {
        let json = serde_json::to_vec(self).expect("world state serializes");
        sha256(&[b"moss/state/v1", &json])
    }

    fn credit(&mut self, who: Address, amount: u128) {
        *self.balances.entry(who).or_default() += amount;
    }

    pub fn apply_block(&mut self, block: &Block) -> Vec<Receipt> {
        block
            .transactions
            .iter()
            .enumerate()
            .map(|(index, tx)| self.apply_transaction(tx, index, block.height, block.timestamp))
            .collect()
    }

    /// Charges the fee, then runs the call. A failing call is rolled back
    /// but its fee stays charged; an unpayable fee leaves everything as is.
    pub fn apply_transaction(&mut self, tx: &Transaction, tx_index: usize, height: u64, now: u64) -> Receipt {
        let call = Call::decode(tx.function_id, &tx.payload);
        let gas_key = match &call {
            Ok(call) => call.gas_key(&tx.sender),
            Err(_) => gas_key_for(tx.function_id),
        };
        let mut receipt = Receipt {
            block_height: height,
            tx_index,
            tx_digest: tx.digest(),
            sender: tx.sender,
            function_id: tx.function_id,
            gas_used: 0,
            fee_wei: 0,
            result: Ok(CallOutput::Unit),
        };

        match charge(&mut self.balances, &tx.sender, gas_key, &self.schedule) {
            Ok(fee) => {
                self.fees_collected += fee;
                receipt.fee_wei = fee;
                receipt.gas_used = self.schedule.gas(gas_key);
            }
            Err(GasError::FeeUnpayable { fee, balance }) => {
                receipt.result = Err(ExecError::FeeUnpayable { fee, balance });
                return receipt;
            }
            Err(other) => unreachable!("charge only fails on fees: {other}"),
        }

        receipt.result = match call {
            Err(_) => Err(ExecError::MalformedPayload),
            Ok(call) => {
                let env = Env { sender: tx.sender, value_wei: tx.value_wei, now, block_height: height };
                self.execute(&env, &call)
            }
        };
        receipt
    }

    fn execute(&mut self, env: &Env, call: &Call) -> Result<CallOutput, ExecError> {
        let balance = self.balance(&env.sender);
        if env.value_wei > balance {
            return Err(ExecError::InsufficientBalance);
        }
        if env.value_wei > 0 && !call.is_payable() {
            return Err(ContractError::NotPayable.into());
        }

        if let Call::Deploy { t_bid, t_free } = call {
            if self.contract.is_some() {
                return Err(ExecError::AlreadyDeployed);
            }
            self.contract = Some(ContractState::deploy(env, &self.administrator, *t_bid, *t_free)?);
            return Ok(CallOutput::Unit);
        }

        let contract = self.contract.as_mut().ok_or(ExecError::NotDeployed)?;
        let (output, payouts) = match call {
            Call::Deploy { .. } => unreachable!("handled above"),
            Call::BidOrAskSubmit { role, bandwidth_mhz, unit_price_gwei } => {
                contract.bid_or_ask_submit(env, *role, *bandwidth_mhz, *unit_price_gwei)?;
                (CallOutput::Unit, vec![])
            }
            Call::RegistrationEnd => (CallOutput::Flag(contract.registration_end(env)?), vec![]),
            Call::SortAskByIncrease => {
                contract.sort_ask_by_increase(env)?;
                (CallOutput::Unit, vec![])
            }
            Call::SortBidByDecrease => {
                contract.sort_bid_by_decrease(env)?;
                (CallOutput::Unit, vec![])
            }
            Call::DoubleAuction => {
                contract.double_auction(env)?;
                (CallOutput::Unit, vec![])
            }
            Call::FreeTradeBegin => {
                contract.free_trade_begin(env)?;
                (CallOutput::Unit, vec![])
            }
            Call::OrderResponse { target, price_gwei, bandwidth_mhz } => {
                contract.order_response(env, target, *price_gwei, *bandwidth_mhz)?;
                (CallOutput::Unit, vec![])
            }
            Call::DeleteOrder => {
                contract.delete_order(env)?;
                (CallOutput::Unit, vec![])
            }
            Call::MarketEnd => (CallOutput::Flag(contract.market_end(env)?), vec![]),
            Call::PayOrNot { operator, executed } => {
                contract.pay_or_not(env, operator, *executed)?;
                (CallOutput::Unit, vec![])
            }
            Call::IncreaseFunds => {
                contract.increase_funds(env)?;
                (CallOutput::Unit, vec![])
            }
            Call::Withdraw => {
                let amount = contract.withdraw(env)?;
                (CallOutput::Paid(amount), vec![(env.sender, amount)])
            }
            Call::ChangeOwner { new_owner } => {
                contract.change_owner(env, new_owner)?;
                (CallOutput::Unit, vec![])
            }
            Call::SelfDestruct => {
                let payouts = contract.self_destruct(env)?;
                let total = payouts.iter().map(|(_, amount)| amount).sum();
                (CallOutput::Paid(total), payouts)
            }
        };

        // value attached to a successful payable call now sits in the deposit
        if env.value_wei > 0 {
            self.balances.insert(env.sender, balance - env.value_wei);
        }
        for (who, amount) in payouts {
            self.credit(who, amount);
        }
        Ok(output)
    }
}
