use std::cmp::min;

use crate::crypto::Address;
use crate::gas::WEI_PER_GWEI;

use super::events::EventKind;
use super::state::{ContractError, ContractState, Env, MatchRecord, Order, Phase, Stage};

impl ContractState {
    fn ask_index(&self, who: &Address) -> Option<usize> {
        self.asks.iter().position(|o| o.owner == *who)
    }

    fn bid_index(&self, who: &Address) -> Option<usize> {
        self.bids.iter().position(|o| o.owner == *who)
    }

    /// Free-trading market entry point.
    ///
    /// With `target == sender` a seller reposts its residual order at a new
    /// price and quantity (at most what it has not yet sold). Otherwise the
    /// sender is a buyer taking `min(bandwidth, posted)` MHz from the seller
    /// at `target`, paying exactly the seller's posted price. Returns the
    /// match for a purchase, `None` for a repost.
    pub fn order_response(
        &mut self,
        env: &Env,
        target: &Address,
        price_gwei: u64,
        bandwidth_mhz: u64,
    ) -> Result<Option<MatchRecord>, ContractError> {
        self.ensure_live()?;
        match self.phase {
            Phase::FreeTrading => {}
            Phase::Cleared => return Err(ContractError::MarketClosed),
            other => return Err(ContractError::WrongPhase(other)),
        }
        if self.market_deadline().is_some_and(|deadline| env.now > deadline) {
            return Err(ContractError::MarketClosed);
        }
        if price_gwei == 0 || bandwidth_mhz == 0 {
            return Err(ContractError::ZeroQuantity);
        }
        if *target == env.sender {
            self.repost(env, price_gwei, bandwidth_mhz).map(|()| None)
        } else {
            self.purchase(env, target, price_gwei, bandwidth_mhz).map(Some)
        }
    }

    fn repost(&mut self, env: &Env, price_gwei: u64, bandwidth_mhz: u64) -> Result<(), ContractError> {
        let Some(index) = self.ask_index(&env.sender) else {
            return Err(if self.bid_index(&env.sender).is_some() {
                ContractError::WrongRole
            } else {
                ContractError::NoOrder
            });
        };
        let untraded = self.registrations.get(&env.sender).map_or(0, |r| r.untraded_mhz());
        if bandwidth_mhz > untraded {
            return Err(ContractError::ExceedsRemaining);
        }
        let order = &mut self.asks[index];
        order.unit_price_gwei = price_gwei;
        order.bandwidth_mhz = bandwidth_mhz;
        self.emit(
            env,
            EventKind::LogFreeMarketOrder { address: env.sender, unit_price_gwei: price_gwei, bandwidth_mhz },
        );
        Ok(())
    }

    fn purchase(
        &mut self,
        env: &Env,
        target: &Address,
        price_gwei: u64,
        bandwidth_mhz: u64,
    ) -> Result<MatchRecord, ContractError> {
        let buyer = env.sender;
        let Some(bid_index) = self.bid_index(&buyer) else {
            return Err(if self.ask_index(&buyer).is_some() {
                ContractError::WrongRole
            } else {
                ContractError::NoOrder
            });
        };
        let ask_index = self.ask_index(target).ok_or(ContractError::UnknownTarget)?;
        let posted = &self.asks[ask_index];
        if posted.unit_price_gwei != price_gwei {
            return Err(ContractError::PriceMismatch);
        }
        if bandwidth_mhz > self.bids[bid_index].bandwidth_mhz {
            return Err(ContractError::ExceedsRemaining);
        }
        let traded = min(bandwidth_mhz, posted.bandwidth_mhz);
        let total_wei = price_gwei as u128 * traded as u128 * WEI_PER_GWEI;
        let available = self.deposit_of(&buyer);
        if available < total_wei {
            return Err(ContractError::BuyerUnderfunded);
        }

        self.deposit.insert(buyer, available - total_wei);
        *self.deposit.entry(*target).or_default() += total_wei;
        self.asks[ask_index].bandwidth_mhz -= traded;
        self.bids[bid_index].bandwidth_mhz -= traded;
        for who in [*target, buyer] {
            if let Some(reg) = self.registrations.get_mut(&who) {
                reg.traded_mhz += traded;
            }
        }
        if self.asks[ask_index].bandwidth_mhz == 0 {
            self.asks.remove(ask_index);
        }
        if self.bids[bid_index].bandwidth_mhz == 0 {
            self.bids.remove(bid_index);
        }

        let record = MatchRecord {
            seller: *target,
            buyer,
            amount_mhz: traded,
            unit_price_gwei: price_gwei,
            stage: Stage::FreeMarket,
            total_wei,
        };
        self.emit(
            env,
            EventKind::LogDealRecord {
                seller: *target,
                buyer,
                amount_mhz: traded,
                unit_price_gwei: price_gwei,
                stage: Stage::FreeMarket,
            },
        );
        self.matches.push(record.clone());
        Ok(record)
    }

    /// Withdraws the caller's residual order from the market. The deposit
    /// stays in the contract until `withdraw`.
    pub fn delete_order(&mut self, env: &Env) -> Result<Order, ContractError> {
        self.ensure_live()?;
        if !matches!(self.phase, Phase::Auctioned | Phase::FreeTrading) {
            return Err(ContractError::WrongPhase(self.phase));
        }
        if let Some(i) = self.ask_index(&env.sender) {
            return Ok(self.asks.remove(i));
        }
        if let Some(i) = self.bid_index(&env.sender) {
            return Ok(self.bids.remove(i));
        }
        Err(ContractError::NoOrder)
    }
}
