//! Admits operators into the permissioned network, checks their
//! administrator-signed certificates and the seller bandwidth constraint.
//!
//!     cargo run --example identity_registry

use moss::crypto::SigningKey;
use moss::registry::{validate_seller_constraint, IdentityRegistry, OperatorProfile, Role};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let admin = SigningKey::from_seed("administrator");
    let mut registry = IdentityRegistry::new(admin.public_key());

    // (id, role, total, required, offered)
    let operators = [
        ("OP1", Role::Seller, 40, 15, 20),
        ("OP2", Role::Seller, 30, 25, 10),
        ("OP4", Role::Buyer, 0, 0, 10),
    ];
    for (id, role, total, required, offered) in operators {
        let key = SigningKey::from_seed(id);
        let identity = registry.register_operator(&admin, id, key.public_key())?;
        println!(
            "{id}: wallet {} certificate valid: {}",
            identity.wallet_address,
            identity.verify_certificate(registry.admin_key())
        );
        if role == Role::Seller {
            let profile = OperatorProfile {
                identity,
                role,
                total_bandwidth_mhz: total,
                required_bandwidth_mhz: required,
                offered_or_demanded_mhz: offered,
                unit_price_gwei: 1,
            };
            println!("  keeps {:?} MHz, needs {required}: may offer {offered}? {}", profile.leftover_bandwidth_mhz(), validate_seller_constraint(&profile)?);
        }
    }

    let duplicate = registry.register_operator(&admin, "OP1", SigningKey::from_seed("other").public_key());
    println!("re-using an id: {}", duplicate.unwrap_err());
    let impostor = SigningKey::from_seed("impostor");
    let forged = registry.register_operator(&impostor, "OP9", impostor.public_key());
    println!("registration signed by a non-administrator: {}", forged.unwrap_err());

    let op2 = SigningKey::from_seed("OP2").address();
    registry.revoke(&admin, &op2)?;
    println!("OP2 revoked: {}, members: {}", registry.is_revoked(&op2), registry.len());
    Ok(())
}
