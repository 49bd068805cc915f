use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::crypto::{sha256, Address, Hash32, PublicKey, Signature, SigningKey};

/// Contract entry point a transaction invokes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FunctionId {
    Deploy,
    BidOrAskSubmit,
    RegistrationEnd,
    SortAskByIncrease,
    SortBidByDecrease,
    DoubleAuction,
    FreeTradeBegin,
    OrderResponse,
    DeleteOrder,
    MarketEnd,
    PayOrNot,
    IncreaseFunds,
    Withdraw,
    ChangeOwner,
    SelfDestruct,
}

impl FunctionId {
    pub const ALL: [FunctionId; 15] = [
        FunctionId::Deploy,
        FunctionId::BidOrAskSubmit,
        FunctionId::RegistrationEnd,
        FunctionId::SortAskByIncrease,
        FunctionId::SortBidByDecrease,
        FunctionId::DoubleAuction,
        FunctionId::FreeTradeBegin,
        FunctionId::OrderResponse,
        FunctionId::DeleteOrder,
        FunctionId::MarketEnd,
        FunctionId::PayOrNot,
        FunctionId::IncreaseFunds,
        FunctionId::Withdraw,
        FunctionId::ChangeOwner,
        FunctionId::SelfDestruct,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Result<Self, DecodeError> {
        Self::ALL
            .get(tag as usize)
            .copied()
            .ok_or(DecodeError::InvalidTag { what: "function id", value: tag })
    }

    /// Name as it appears in the contract's public interface.
    pub fn name(self) -> &'static str {
        match self {
            FunctionId::Deploy => "deploy",
            FunctionId::BidOrAskSubmit => "BidOrAskSubmit",
            FunctionId::RegistrationEnd => "RegistrationEnd",
            FunctionId::SortAskByIncrease => "sortAskByIncrease",
            FunctionId::SortBidByDecrease => "sortBidByDecrease",
            FunctionId::DoubleAuction => "DoubleAuction",
            FunctionId::FreeTradeBegin => "freeTradeBegin",
            FunctionId::OrderResponse => "orderResponse",
            FunctionId::DeleteOrder => "deleteOrder",
            FunctionId::MarketEnd => "MarketEnd",
            FunctionId::PayOrNot => "payORnot",
            FunctionId::IncreaseFunds => "increaseFunds",
            FunctionId::Withdraw => "withdraw",
            FunctionId::ChangeOwner => "changeOwner",
            FunctionId::SelfDestruct => "selfDestruct",
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A signed function call.
///
/// Byte layout (see [`crate::codec`]): `sender[20] | function u8 | payload
/// (u32 len + bytes) | value_wei u128 | nonce u64 | timestamp u64 |
/// signature[64]`. The signature covers the same layout minus the signature,
/// prefixed with a domain tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub sender: Address,
    pub function_id: FunctionId,
    pub payload: Vec<u8>,
    pub value_wei: u128,
    pub nonce: u64,
    pub timestamp: u64,
    pub signature: Signature,
}

impl Transaction {
    pub fn signed(
        key: &SigningKey,
        function_id: FunctionId,
        payload: Vec<u8>,
        value_wei: u128,
        nonce: u64,
        timestamp: u64,
    ) -> Self {
        let mut tx = Self {
            sender: key.address(),
            function_id,
            payload,
            value_wei,
            nonce,
            timestamp,
            signature: Signature([0; 64]),
        };
        tx.signature = key.sign(&tx.signing_bytes());
        tx
    }

    fn encode_unsigned(&self, w: &mut Writer) {
        w.put(&self.sender)
            .u8(self.function_id.tag())
            .bytes(&self.payload)
            .u128(self.value_wei)
            .u64(self.nonce)
            .u64(self.timestamp);
    }

    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(b"moss/tx/v1");
        self.encode_unsigned(&mut w);
        w.finish()
    }

    pub fn verify_signature(&self, key: &PublicKey) -> bool {
        key.address() == self.sender && key.verify(&self.signing_bytes(), &self.signature)
    }

    /// Merkle leaf: hash of the full encoding, signature included.
    pub fn digest(&self) -> Hash32 {
        sha256(&[&self.to_bytes()])
    }
}

impl Encode for Transaction {
    fn encode(&self, w: &mut Writer) {
        self.encode_unsigned(w);
        w.put(&self.signature);
    }
}

impl Decode for Transaction {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            sender: r.get()?,
            function_id: FunctionId::from_tag(r.u8()?)?,
            payload: r.bytes()?,
            value_wei: r.u128()?,
            nonce: r.u64()?,
            timestamp: r.u64()?,
            signature: r.get()?,
        })
    }
}
