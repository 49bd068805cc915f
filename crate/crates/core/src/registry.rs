//! Administrator-run certificate authority for the permissioned chain.
//!
//! Operators register `{id, public key}` with the administrator, who issues a
//! certificate binding the id, key and derived wallet address. The registry is
//! what the ledger consults to decide whether a transaction sender belongs to
//! the network. The id to address mapping stays with the administrator; only
//! wallet addresses ever appear on chain.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::crypto::{Address, PublicKey, Signature, SigningKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Seller,
    Buyer,
}

impl Role {
    pub fn tag(self) -> u8 {
        match self {
            Role::Seller => 0,
            Role::Buyer => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self, DecodeError> {
        match tag {
            0 => Ok(Role::Seller),
            1 => Ok(Role::Buyer),
            value => Err(DecodeError::InvalidTag { what: "role", value }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("operator id {0:?} is already registered")]
    DuplicateId(String),
    #[error("signing key is not the administrator's")]
    NotAdministrator,
    #[error("no operator with address {0}")]
    UnknownAddress(Address),
    #[error("certificate for {0:?} does not verify")]
    BadCertificate(String),
    #[error("wallet address of {0:?} does not match its public key")]
    AddressMismatch(String),
    #[error("profile role is not seller")]
    WrongRole,
}

/// `{ID, PK, Cert, WA}` for one registered operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorIdentity {
    pub id: String,
    pub public_key: PublicKey,
    pub certificate: Signature,
    pub wallet_address: Address,
}

impl OperatorIdentity {
    fn certificate_bytes(id: &str, public_key: &PublicKey, wallet: &Address) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(b"moss/cert/v1").str(id).put(public_key).put(wallet);
        w.finish()
    }

    pub fn verify_certificate(&self, admin: &PublicKey) -> bool {
        let bytes = Self::certificate_bytes(&self.id, &self.public_key, &self.wallet_address);
        admin.verify(&bytes, &self.certificate) && self.public_key.address() == self.wallet_address
    }
}

impl Encode for OperatorIdentity {
    fn encode(&self, w: &mut Writer) {
        w.str(&self.id).put(&self.public_key).put(&self.certificate).put(&self.wallet_address);
    }
}

impl Decode for OperatorIdentity {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            id: r.string()?,
            public_key: r.get()?,
            certificate: r.get()?,
            wallet_address: r.get()?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct IdentityRegistry {
    admin: PublicKey,
    identities: BTreeMap<String, OperatorIdentity>,
    by_address: BTreeMap<Address, String>,
    revoked: BTreeSet<Address>,
}

impl IdentityRegistry {
    pub fn new(admin: PublicKey) -> Self {
        Self {
            admin,
            identities: BTreeMap::new(),
            by_address: BTreeMap::new(),
            revoked: BTreeSet::new(),
        }
    }

    /// Rebuilds a registry from previously issued identities, checking every
    /// certificate against `admin`.
    pub fn from_identities(
        admin: PublicKey,
        identities: impl IntoIterator<Item = OperatorIdentity>,
    ) -> Result<Self, RegistryError> {
        let mut registry = Self::new(admin);
        for identity in identities {
            if !identity.verify_certificate(&admin) {
                return Err(RegistryError::BadCertificate(identity.id));
            }
            registry.insert(identity)?;
        }
        Ok(registry)
    }

    pub fn admin_key(&self) -> &PublicKey {
        &self.admin
    }

    pub fn register_operator(
        &mut self,
        admin_key: &SigningKey,
        id: &str,
        public_key: PublicKey,
    ) -> Result<OperatorIdentity, RegistryError> {
        if admin_key.public_key() != self.admin {
            return Err(RegistryError::NotAdministrator);
        }
        if self.identities.contains_key(id) {
            return Err(RegistryError::DuplicateId(id.to_owned()));
        }
        let wallet_address = public_key.address();
        let certificate =
            admin_key.sign(&OperatorIdentity::certificate_bytes(id, &public_key, &wallet_address));
        let identity = OperatorIdentity { id: id.to_owned(), public_key, certificate, wallet_address };
        self.insert(identity.clone())?;
        Ok(identity)
    }

    fn insert(&mut self, identity: OperatorIdentity) -> Result<(), RegistryError> {
        if self.identities.contains_key(&identity.id) {
            return Err(RegistryError::DuplicateId(identity.id));
        }
        if identity.public_key.address() != identity.wallet_address {
            return Err(RegistryError::AddressMismatch(identity.id));
        }
        self.by_address.insert(identity.wallet_address, identity.id.clone());
        self.identities.insert(identity.id.clone(), identity);
        Ok(())
    }

    /// Marks an address revoked. Transactions it already has on chain stay valid.
    pub fn revoke(&mut self, admin_key: &SigningKey, address: &Address) -> Result<(), RegistryError> {
        if admin_key.public_key() != self.admin {
            return Err(RegistryError::NotAdministrator);
        }
        if !self.by_address.contains_key(address) {
            return Err(RegistryError::UnknownAddress(*address));
        }
        self.revoked.insert(*address);
        Ok(())
    }

    pub fn is_revoked(&self, address: &Address) -> bool {
        self.revoked.contains(address)
    }

    pub fn by_address(&self, address: &Address) -> Option<&OperatorIdentity> {
        self.by_address.get(address).and_then(|id| self.identities.get(id))
    }

    pub fn by_id(&self, id: &str) -> Option<&OperatorIdentity> {
        self.identities.get(id)
    }

    /// Public key of an active (registered, unrevoked) member.
    pub fn member_key(&self, address: &Address) -> Option<&PublicKey> {
        if self.is_revoked(address) {
            return None;
        }
        self.by_address(address).map(|identity| &identity.public_key)
    }

    pub fn identities(&self) -> impl Iterator<Item = &OperatorIdentity> {
        self.identities.values()
    }

    pub fn len(&self) -> usize {
        self.identities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.identities.is_empty()
    }
}

/// Off-chain view of an operator used when deciding what to bid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorProfile {
    pub identity: OperatorIdentity,
    pub role: Role,
    pub total_bandwidth_mhz: u64,
    pub required_bandwidth_mhz: u64,
    /// Offered bandwidth for a seller, demanded bandwidth for a buyer.
    pub offered_or_demanded_mhz: u64,
    pub unit_price_gwei: u64,
}

impl OperatorProfile {
    pub fn leftover_bandwidth_mhz(&self) -> Option<u64> {
        self.total_bandwidth_mhz.checked_sub(self.offered_or_demanded_mhz)
    }
}

/// A seller may only offer what it does not itself need:
/// `total - offered >= required`.
pub fn validate_seller_constraint(profile: &OperatorProfile) -> Result<bool, RegistryError> {
    if profile.role != Role::Seller {
        return Err(RegistryError::WrongRole);
    }
    Ok(profile
        .leftover_bandwidth_mhz()
        .is_some_and(|left| left >= profile.required_bandwidth_mhz))
}
