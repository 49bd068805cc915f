use std::collections::BTreeMap;

use crate::codec::{Decode, DecodeError, Encode, Reader, Writer};
use crate::contract::World;
use crate::crypto::{Address, PublicKey};
use crate::gas::GasSchedule;
use crate::registry::{IdentityRegistry, OperatorIdentity, RegistryError};

/// Everything a verifier needs besides the blocks: who may vote, who may
/// transact, starting balances and the fee schedule. Stored as the chain
/// file header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genesis {
    pub name: String,
    pub replica_keys: Vec<PublicKey>,
    pub admin_key: PublicKey,
    pub identities: Vec<OperatorIdentity>,
    pub balances: Vec<(Address, u128)>,
    pub schedule: GasSchedule,
}

impl Genesis {
    pub fn registry(&self) -> Result<IdentityRegistry, RegistryError> {
        IdentityRegistry::from_identities(self.admin_key, self.identities.iter().cloned())
    }

    pub fn world(&self) -> World {
        let balances: BTreeMap<Address, u128> = self.balances.iter().copied().collect();
        World::new(self.admin_key.address(), balances, self.schedule.clone())
    }
}

impl Encode for Genesis {
    fn encode(&self, w: &mut Writer) {
        w.raw(b"moss/genesis/v1").str(&self.name).seq(&self.replica_keys).put(&self.admin_key);
        w.seq(&self.identities);
        w.len(self.balances.len());
        for (address, wei) in &self.balances {
            w.put(address).u128(*wei);
        }
        w.put(&self.schedule);
    }
}

impl Decode for Genesis {
    fn decode(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        if r.take(15)? != b"moss/genesis/v1" {
            return Err(DecodeError::Invalid("genesis tag"));
        }
        let name = r.string()?;
        let replica_keys = r.seq()?;
        let admin_key = r.get()?;
        let identities = r.seq()?;
        let count = r.len()?;
        let balances = (0..count).map(|_| Ok((r.get()?, r.u128()?))).collect::<Result<_, DecodeError>>()?;
        let schedule = r.get()?;
        Ok(Self { name, replica_keys, admin_key, identities, balances, schedule })
    }
}
