use crate::codec::{DecodeError, Reader, Writer};
use crate::crypto::Address;
use crate::gas::GasKey;
use crate::ledger::FunctionId;
use crate::registry::Role;

/// Decoded contract call. The transaction carries `function_id()` and
/// `encode_payload()`; [`Call::decode`] is the inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Call {
    Deploy { t_bid: u64, t_free: u64 },
    BidOrAskSubmit { role: Role, bandwidth_mhz: u64, unit_price_gwei: u64 },
    RegistrationEnd,
    SortAskByIncrease,
    SortBidByDecrease,
    DoubleAuction,
    FreeTradeBegin,
    OrderResponse { target: Address, price_gwei: u64, bandwidth_mhz: u64 },
    DeleteOrder,
    MarketEnd,
    PayOrNot { operator: Address, executed: bool },
    IncreaseFunds,
    Withdraw,
    ChangeOwner { new_owner: Address },
    SelfDestruct,
}

impl Call {
    pub fn function_id(&self) -> FunctionId {
        match self {
            Call::Deploy { .. } => FunctionId::Deploy,
            Call::BidOrAskSubmit { .. } => FunctionId::BidOrAskSubmit,
            Call::RegistrationEnd => FunctionId::RegistrationEnd,
            Call::SortAskByIncrease => FunctionId::SortAskByIncrease,
            Call::SortBidByDecrease => FunctionId::SortBidByDecrease,
            Call::DoubleAuction => FunctionId::DoubleAuction,
            Call::FreeTradeBegin => FunctionId::FreeTradeBegin,
            Call::OrderResponse { .. } => FunctionId::OrderResponse,
            Call::DeleteOrder => FunctionId::DeleteOrder,
            Call::MarketEnd => FunctionId::MarketEnd,
            Call::PayOrNot { .. } => FunctionId::PayOrNot,
            Call::IncreaseFunds => FunctionId::IncreaseFunds,
            Call::Withdraw => FunctionId::Withdraw,
            Call::ChangeOwner { .. } => FunctionId::ChangeOwner,
            Call::SelfDestruct => FunctionId::SelfDestruct,
        }
    }

    pub fn is_payable(&self) -> bool {
        matches!(self, Call::BidOrAskSubmit { .. } | Call::IncreaseFunds)
    }

    /// `orderResponse` costs differ between a seller reposting its own order
    /// and a buyer purchasing from someone else.
    pub fn gas_key(&self, sender: &Address) -> GasKey {
        match self {
            Call::OrderResponse { target, .. } if target == sender => GasKey::OrderResponseSeller,
            other => gas_key_for(other.function_id()),
        }
    }

    pub fn encode_payload(&self) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            Call::Deploy { t_bid, t_free } => {
                w.u64(*t_bid).u64(*t_free);
            }
            Call::BidOrAskSubmit { role, bandwidth_mhz, unit_price_gwei } => {
                w.u8(role.tag()).u64(*bandwidth_mhz).u64(*unit_price_gwei);
            }
            Call::OrderResponse { target, price_gwei, bandwidth_mhz } => {
                w.put(target).u64(*price_gwei).u64(*bandwidth_mhz);
            }
            Call::PayOrNot { operator, executed } => {
                w.put(operator).bool(*executed);
            }
            Call::ChangeOwner { new_owner } => {
                w.put(new_owner);
            }
            _ => {}
        }
        w.finish()
    }

    pub fn decode(function_id: FunctionId, payload: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(payload);
        let call = match function_id {
            FunctionId::Deploy => Call::Deploy { t_bid: r.u64()?, t_free: r.u64()? },
            FunctionId::BidOrAskSubmit => Call::BidOrAskSubmit {
                role: Role::from_tag(r.u8()?)?,
                bandwidth_mhz: r.u64()?,
                unit_price_gwei: r.u64()?,
            },
            FunctionId::RegistrationEnd => Call::RegistrationEnd,
            FunctionId::SortAskByIncrease => Call::SortAskByIncrease,
            FunctionId::SortBidByDecrease => Call::SortBidByDecrease,
            FunctionId::DoubleAuction => Call::DoubleAuction,
            FunctionId::FreeTradeBegin => Call::FreeTradeBegin,
            FunctionId::OrderResponse => Call::OrderResponse {
                target: r.get()?,
                price_gwei: r.u64()?,
                bandwidth_mhz: r.u64()?,
            },
            FunctionId::DeleteOrder => Call::DeleteOrder,
            FunctionId::MarketEnd => Call::MarketEnd,
            FunctionId::PayOrNot => Call::PayOrNot { operator: r.get()?, executed: r.bool()? },
            FunctionId::IncreaseFunds => Call::IncreaseFunds,
            FunctionId::Withdraw => Call::Withdraw,
            FunctionId::ChangeOwner => Call::ChangeOwner { new_owner: r.get()? },
            FunctionId::SelfDestruct => Call::SelfDestruct,
        };
        r.finish()?;
        Ok(call)
    }
}

/// Schedule entry charged for a function when the payload is not inspected.
pub fn gas_key_for(function_id: FunctionId) -> GasKey {
    match function_id {
        FunctionId::Deploy => GasKey::Deploy,
        FunctionId::BidOrAskSubmit => GasKey::BidOrAskSubmit,
        FunctionId::RegistrationEnd => GasKey::RegistrationEnd,
        FunctionId::SortAskByIncrease => GasKey::SortAskByIncrease,
        FunctionId::SortBidByDecrease => GasKey::SortBidByDecrease,
        FunctionId::DoubleAuction => GasKey::DoubleAuction,
        FunctionId::FreeTradeBegin => GasKey::FreeTradeBegin,
        FunctionId::OrderResponse => GasKey::OrderResponseBuyer,
        FunctionId::DeleteOrder => GasKey::DeleteOrder,
        FunctionId::MarketEnd => GasKey::MarketEnd,
        FunctionId::PayOrNot => GasKey::PayOrNot,
        FunctionId::IncreaseFunds => GasKey::IncreaseFunds,
        FunctionId::Withdraw => GasKey::Withdraw,
        FunctionId::ChangeOwner => GasKey::ChangeOwner,
        FunctionId::SelfDestruct => GasKey::SelfDestruct,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_call() -> impl Strategy<Value = Call> {
        let addr = any::<[u8; 20]>().prop_map(Address);
        prop_oneof![
            (any::<u64>(), any::<u64>()).prop_map(|(t_bid, t_free)| Call::Deploy { t_bid, t_free }),
            (any::<bool>(), any::<u64>(), any::<u64>()).prop_map(|(s, b, p)| Call::BidOrAskSubmit {
                role: if s { Role::Seller } else { Role::Buyer },
                bandwidth_mhz: b,
                unit_price_gwei: p
            }),
            (addr.clone(), any::<u64>(), any::<u64>()).prop_map(|(target, price_gwei, bandwidth_mhz)| {
                Call::OrderResponse { target, price_gwei, bandwidth_mhz }
            }),
            (addr.clone(), any::<bool>()).prop_map(|(operator, executed)| Call::PayOrNot { operator, executed }),
            addr.prop_map(|new_owner| Call::ChangeOwner { new_owner }),
            Just(Call::RegistrationEnd),
            Just(Call::DoubleAuction),
            Just(Call::Withdraw),
            Just(Call::SelfDestruct),
        ]
    }

    proptest! {
        #[test]
        fn payload_round_trips(call in arb_call()) {
            let decoded = Call::decode(call.function_id(), &call.encode_payload()).unwrap();
            prop_assert_eq!(decoded, call);
        }
    }

    #[test]
    fn order_response_gas_depends_on_mode() {
        let me = Address([1; 20]);
        let other = Address([2; 20]);
        let repost = Call::OrderResponse { target: me, price_gwei: 1, bandwidth_mhz: 1 };
        let buy = Call::OrderResponse { target: other, price_gwei: 1, bandwidth_mhz: 1 };
        assert_eq!(repost.gas_key(&me), GasKey::OrderResponseSeller);
        assert_eq!(buy.gas_key(&me), GasKey::OrderResponseBuyer);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let call = Call::ChangeOwner { new_owner: Address([7; 20]) };
        let bytes = call.encode_payload();
        assert!(Call::decode(FunctionId::ChangeOwner, &bytes[..19]).is_err());
        assert!(Call::decode(FunctionId::Withdraw, &bytes).is_err());
    }
}
