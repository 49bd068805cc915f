use std::cmp::min;

use crate::gas::WEI_PER_GWEI;

use super::events::EventKind;
use super::state::{ContractError, ContractState, Env, MatchRecord, Phase, Stage};

impl ContractState {
    /// Matches the cheapest ask against the highest bid at the midpoint price
    /// until a book empties or the best bid falls below the best ask.
    ///
    /// Each round trades `min(B1, W1)` MHz at `floor((p1 + c1) / 2)` Gwei,
    /// moves the money from the buyer's deposit to the seller's, and drops
    /// every head whose quantity reached zero (both heads when they tie). A
    /// buyer who cannot cover a trade is removed without trading. Every round
    /// removes at least one head, so the loop runs at most `M + N` times.
    pub fn double_auction(&mut self, env: &Env) -> Result<Vec<MatchRecord>, ContractError> {
        self.ensure_owner(env)?;
        if self.double_auction_finish {
            return Err(ContractError::AlreadyAuctioned);
        }
        if self.phase != Phase::AuctionReady {
            return Err(ContractError::WrongPhase(self.phase));
        }
        if !(self.asks_sorted && self.bids_sorted) {
            return Err(ContractError::BooksUnsorted);
        }

        let mut matches = Vec::new();
        while let (Some(ask), Some(bid)) = (self.asks.first(), self.bids.first()) {
            if bid.unit_price_gwei < ask.unit_price_gwei {
                break;
            }
            let (seller, buyer) = (ask.owner, bid.owner);
            let price = ((ask.unit_price_gwei as u128 + bid.unit_price_gwei as u128) / 2) as u64;
            let amount = min(ask.bandwidth_mhz, bid.bandwidth_mhz);
            let total_wei = price as u128 * amount as u128 * WEI_PER_GWEI;

            let available = self.deposit_of(&buyer);
            if available < total_wei {
                self.bids.remove(0);
                self.emit(
                    env,
                    EventKind::LogBuyerUnderfunded {
                        buyer,
                        seller,
                        required_wei: total_wei,
                        available_wei: available,
                    },
                );
                continue;
            }

            self.deposit.insert(buyer, available - total_wei);
            *self.deposit.entry(seller).or_default() += total_wei;
            self.asks[0].bandwidth_mhz -= amount;
            self.bids[0].bandwidth_mhz -= amount;
            for who in [seller, buyer] {
                if let Some(reg) = self.registrations.get_mut(&who) {
                    reg.traded_mhz += amount;
                }
            }
            if self.asks[0].bandwidth_mhz == 0 {
                self.asks.remove(0);
            }
            if self.bids[0].bandwidth_mhz == 0 {
                self.bids.remove(0);
            }

            let record = MatchRecord {
                seller,
                buyer,
                amount_mhz: amount,
                unit_price_gwei: price,
                stage: Stage::Auction,
                total_wei,
            };
            self.emit(
                env,
                EventKind::LogDealRecord {
                    seller,
                    buyer,
                    amount_mhz: amount,
                    unit_price_gwei: price,
                    stage: Stage::Auction,
                },
            );
            self.matches.push(record.clone());
            matches.push(record);
        }

        self.double_auction_finish = true;
        self.phase = Phase::Auctioned;
        Ok(matches)
    }
}
