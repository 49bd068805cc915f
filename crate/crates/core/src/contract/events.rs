use serde::Serialize;

use crate::crypto::Address;
use crate::registry::Role;

use super::state::Stage;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventKind {
    LogRegisterOp {
        address: Address,
        role: Role,
        bandwidth_mhz: u64,
        unit_price_gwei: u64,
    },
    LogDealRecord {
        seller: Address,
        buyer: Address,
        amount_mhz: u64,
        unit_price_gwei: u64,
        stage: Stage,
    },
    LogFreeMarketOrder {
        address: Address,
        unit_price_gwei: u64,
        bandwidth_mhz: u64,
    },
    /// A match skipped in the auction because the buyer could not pay.
    LogBuyerUnderfunded {
        buyer: Address,
        seller: Address,
        required_wei: u128,
        available_wei: u128,
    },
}

/// One line of the JSON-lines event log:
/// `{"block_height":..,"log_index":..,"kind":..,"payload":{..}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub block_height: u64,
    pub log_index: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}
