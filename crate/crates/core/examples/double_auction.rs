//! Drives the contract state machine directly through one registration and
//! auction round, then checks the result against the brute-force oracle.
//!
//!     cargo run --example double_auction

use moss::contract::{ContractState, Env};
use moss::crypto::SigningKey;
use moss::gas::WEI_PER_ETHER;
use moss::oracle::{oracle_match, OracleInstance};
use moss::registry::Role;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let admin = SigningKey::from_seed("admin").address();
    let at = |sender, value_wei, now| Env { sender, value_wei, now, block_height: now };

    let mut contract = ContractState::deploy(&at(admin, 0, 1000), &admin, 600, 600)?;
    let orders = [
        ("OP1", Role::Seller, 20, 2_000_000),
        ("OP2", Role::Seller, 10, 1_600_000),
        ("OP3", Role::Seller, 15, 2_400_000),
        ("OP4", Role::Buyer, 10, 1_500_000),
        ("OP5", Role::Buyer, 12, 2_500_000),
        ("OP6", Role::Buyer, 8, 1_800_000),
    ];
    let addresses: Vec<_> = orders.iter().map(|(name, ..)| SigningKey::from_seed(name).address()).collect();
    for (i, (_, role, bw, price)) in orders.iter().enumerate() {
        contract.bid_or_ask_submit(&at(addresses[i], WEI_PER_ETHER, 1010 + i as u64), *role, *bw, *price)?;
    }

    let close = at(admin, 0, 1601);
    assert!(contract.registration_end(&close)?);
    contract.sort_ask_by_increase(&close)?;
    contract.sort_bid_by_decrease(&close)?;
    let matches = contract.double_auction(&close)?;

    let name = |a| orders[addresses.iter().position(|x| *x == a).unwrap()].0;
    for m in &matches {
        println!("{} -> {}: {} MHz at {} Gwei/MHz", name(m.seller), name(m.buyer), m.amount_mhz, m.unit_price_gwei);
    }
    println!("residual asks: {:?}", contract.asks.iter().map(|o| (name(o.owner), o.bandwidth_mhz)).collect::<Vec<_>>());
    println!("residual bids: {:?}", contract.bids.iter().map(|o| (name(o.owner), o.bandwidth_mhz)).collect::<Vec<_>>());

    let side = |role| {
        orders
            .iter()
            .enumerate()
            .filter(|(_, o)| o.1 == role)
            .map(|(i, o)| (o.3, o.2, i))
            .collect::<Vec<_>>()
    };
    let expected = oracle_match(&OracleInstance { asks: side(Role::Seller), bids: side(Role::Buyer) });
    let got: Vec<_> = matches
        .iter()
        .map(|m| {
            let tag = |a| addresses.iter().position(|x| *x == a).unwrap();
            (tag(m.seller), tag(m.buyer), m.amount_mhz, m.unit_price_gwei)
        })
        .collect();
    assert_eq!(got, expected);
    println!("oracle agrees on all {} matches", got.len());
    Ok(())
}
