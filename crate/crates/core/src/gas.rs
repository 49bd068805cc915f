//! Flat per-function gas accounting and ether conversion.
//!
//! Each contract function has a fixed gas cost; the fee in wei is
//! `gas * gas_price_gwei * 1e9`, computed with exact rationals so that
//! balance conservation can be checked with integer equality.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::crypto::Address;

pub const WEI_PER_GWEI: u128 = 1_000_000_000;
pub const WEI_PER_ETHER: u128 = 1_000_000_000_000_000_000;

/// Gas schedule entry. `orderResponse` has separate buyer and seller costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GasKey {
    Deploy,
    BidOrAskSubmit,
    RegistrationEnd,
    SortAskByIncrease,
    SortBidByDecrease,
    DoubleAuction,
    FreeTradeBegin,
    OrderResponseBuyer,
    OrderResponseSeller,
    DeleteOrder,
    MarketEnd,
    PayOrNot,
    IncreaseFunds,
    Withdraw,
    ChangeOwner,
    SelfDestruct,
}

impl GasKey {
    pub const ALL: [GasKey; 16] = [
        GasKey::Deploy,
        GasKey::BidOrAskSubmit,
        GasKey::RegistrationEnd,
        GasKey::SortAskByIncrease,
        GasKey::SortBidByDecrease,
        GasKey::DoubleAuction,
        GasKey::FreeTradeBegin,
        GasKey::OrderResponseBuyer,
        GasKey::OrderResponseSeller,
        GasKey::DeleteOrder,
        GasKey::MarketEnd,
        GasKey::PayOrNot,
        GasKey::IncreaseFunds,
        GasKey::Withdraw,
        GasKey::ChangeOwner,
        GasKey::SelfDestruct,
    ];

    /// Measured whole-function cost used as the default schedule.
    pub fn default_gas(self) -> u64 {
        match self {
            GasKey::Deploy => 4_767_204,
            GasKey::RegistrationEnd => 21_799,
            GasKey::SortAskByIncrease => 70_696,
            GasKey::SortBidByDecrease => 116_557,
            GasKey::DoubleAuction => 368_357,
            GasKey::FreeTradeBegin => 42_413,
            GasKey::MarketEnd => 21_776,
            GasKey::PayOrNot => 29_018,
            GasKey::ChangeOwner => 28_811,
            GasKey::SelfDestruct => 13_495,
            GasKey::BidOrAskSubmit => 216_416,
            GasKey::DeleteOrder => 21_229,
            GasKey::OrderResponseBuyer => 24_277,
            GasKey::OrderResponseSeller => 35_085,
            GasKey::Withdraw => 22_188,
            GasKey::IncreaseFunds => 26_757,
        }
    }

    fn tag(self) -> u8 {
        self as u8
    }

    fn from_tag(tag: u8) -> Result<Self, DecodeError> {
        Self::ALL
            .get(tag as usize)
            .copied()
            .ok_or(DecodeError::InvalidTag { what: "gas key", value: tag })
    }
}

/// Gas price in Gwei, held as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GasPrice(Ratio<u128>);

impl GasPrice {
    pub fn new(numer: u128, denom: u128) -> Result<Self, GasError> {
        if numer == 0 || denom == 0 {
            return Err(GasError::NonPositivePrice);
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    pub fn gwei(&self) -> Ratio<u128> {
        self.0
    }

    pub fn wei_per_gas(&self) -> Ratio<u128> {
        self.0 * Ratio::from_integer(WEI_PER_GWEI)
    }
}

impl Default for GasPrice {
    /// 4.3 Gwei.
    fn default() -> Self {
        Self(Ratio::new(43, 10))
    }
}

impl FromStr for GasPrice {
    type Err = GasError;

    /// Parses a plain decimal such as `4.3` or `20`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GasError::BadPrice(s.to_owned());
        let s = s.trim();
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 18 {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let numer: u128 = digits.parse().map_err(|_| bad())?;
        let denom = 10u128.pow(frac.len() as u32);
        GasPrice::new(numer, denom)
    }
}

impl fmt::Display for GasPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // exact when the denominator is a power of ten, which is the parse path
        let (n, d) = (*self.0.numer(), *self.0.denom());
        let int = n / d;
        let mut rem = n % d;
        if rem == 0 {
            return write!(f, "{int}");
        }
        let mut frac = String::new();
        while rem != 0 && frac.len() < 18 {
            rem *= 10;
            frac.push(char::from(b'0' + (rem / d) as u8));
            rem %= d;
        }
        write!(f, "{int}.{frac}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GasError {
    #[error("gas price must be positive")]
    NonPositivePrice,
    #[error("cannot parse gas price {0:?}")]
    BadPrice(String),
    #[error("fee of {fee} wei exceeds balance of {balance} wei")]
    FeeUnpayable { fee: u128, balance: u128 },
}

/// Exact ether cost in wei: `gas_units * gas_price_gwei * 1e9`.
pub fn ether_cost(gas_units: u64, gas_price: &GasPrice) -> Ratio<u128> {
    gas_price.wei_per_gas() * Ratio::from_integer(gas_units as u128)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GasSchedule {
    per_function: BTreeMap<GasKey, u64>,
    pub gas_price: GasPrice,
}

impl Default for GasSchedule {
    fn default() -> Self {
        Self {
            per_function: GasKey::ALL.iter().map(|k| (*k, k.default_gas())).collect(),
            gas_price: GasPrice::default(),
        }
    }
}

impl GasSchedule {
    pub fn with_price(mut self, price: GasPrice) -> Self {
        self.gas_price = price;
        self
    }

    /// Overrides one entry. Zero is allowed for custom schedules.
    pub fn set(&mut self, key: GasKey, gas: u64) {
        self.per_function.insert(key, gas);
    }

    pub fn gas(&self, key: GasKey) -> u64 {
        self.per_function.get(&key).copied().unwrap_or_else(|| key.default_gas())
    }

    /// Fee in whole wei, rounded up when the price has sub-wei precision.
    pub fn fee_wei(&self, key: GasKey) -> u128 {
        ether_cost(self.gas(key), &self.gas_price).ceil().to_integer()
    }
}

impl Encode for GasSchedule {
    fn encode(&self, w: &mut Writer) {
        w.u128(*self.gas_price.0.numer()).u128(*self.gas_price.0.denom());
        w.len(self.per_function.len());
        for (key, gas) in &self.per_function {
            w.u8(key.tag()).u64(*gas);
        }
    }
}

impl Decode for GasSchedule {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let numer = r.u128()?;
        let denom = r.u128()?;
        let gas_price = GasPrice::new(numer, denom).map_err(|_| DecodeError::Invalid("gas price"))?;
        let count = r.len()?;
        let mut per_function = BTreeMap::new();
        for _ in 0..count {
            per_function.insert(GasKey::from_tag(r.u8()?)?, r.u64()?);
        }
        Ok(Self { per_function, gas_price })
    }
}

/// Deducts the fee for `key` from `sender`'s external balance and returns it.
pub fn charge(
    balances: &mut BTreeMap<Address, u128>,
    sender: &Address,
    key: GasKey,
    schedule: &GasSchedule,
) -> Result<u128, GasError> {
    let fee = schedule.fee_wei(key);
    let balance = balances.get(sender).copied().unwrap_or(0);
    if balance < fee {
        return Err(GasError::FeeUnpayable { fee, balance });
    }
    if fee > 0 {
        balances.insert(*sender, balance - fee);
    }
    Ok(fee)
}
