#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use moss::contract::{ContractState, Env, MatchRecord, Stage};
use moss::crypto::{Address, SigningKey};
use moss::gas::WEI_PER_ETHER;
use moss::oracle::{oracle_match, OracleInstance, OracleMatch};
use moss::registry::Role;
use moss::scenario::{fuzz, ScenarioConfig};

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn load(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&scenarios_dir().join(format!("{name}.toml"))).unwrap()
}

/// Every runnable bundled scenario (the fuzz template is not one).
pub fn bundled() -> Vec<ScenarioConfig> {
    let mut paths: Vec<_> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .filter(|p| p.file_stem().is_some_and(|s| s != "fuzz_template"))
        .collect();
    paths.sort();
    paths.iter().map(|p| ScenarioConfig::load(p).unwrap()).collect()
}

pub fn fuzzed(seed: u64) -> ScenarioConfig {
    fuzz::generate(seed, &load("fuzz_template"))
}

/// (role, bandwidth MHz, price Gwei) in submission order.
pub type Book = Vec<(Role, u64, u64)>;

/// Random instance: 1..=8 orders per side, prices 1..=100 Gwei, bandwidth 1..=20 MHz.
pub fn random_book(seed: u64) -> Book {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut book = Vec::new();
    for role in [Role::Seller, Role::Buyer] {
        for _ in 0..rng.gen_range(1..=8) {
            book.push((role, rng.gen_range(1..=20), rng.gen_range(1..=100)));
        }
    }
    // interleave submission order
    for i in (1..book.len()).rev() {
        book.swap(i, rng.gen_range(0..=i));
    }
    book
}

pub fn operator(i: usize) -> Address {
    SigningKey::from_seed(&format!("operator-{i}")).address()
}

pub fn admin() -> Address {
    SigningKey::from_seed("admin").address()
}

pub fn env(sender: Address, value_wei: u128, now: u64) -> Env {
    Env { sender, value_wei, now, block_height: now }
}

/// Registers the book with 1 eth deposits and runs the auction.
pub fn auction(book: &Book) -> (ContractState, Vec<MatchRecord>) {
    let mut c = ContractState::deploy(&env(admin(), 0, 1000), &admin(), 100, 100).unwrap();
    for (i, (role, bw, price)) in book.iter().enumerate() {
        c.bid_or_ask_submit(&env(operator(i), WEI_PER_ETHER, 1001 + i as u64), *role, *bw, *price).unwrap();
    }
    let now = 1101;
    assert!(c.registration_end(&env(admin(), 0, now)).unwrap());
    c.sort_ask_by_increase(&env(admin(), 0, now)).unwrap();
    c.sort_bid_by_decrease(&env(admin(), 0, now)).unwrap();
    let matches = c.double_auction(&env(admin(), 0, now)).unwrap();
    (c, matches)
}

pub fn as_tags(matches: &[MatchRecord], book_len: usize) -> Vec<OracleMatch> {
    let tags: BTreeMap<Address, usize> = (0..book_len).map(|i| (operator(i), i)).collect();
    matches
        .iter()
        .map(|m| {
            assert_eq!(m.stage, Stage::Auction);
            (tags[&m.seller], tags[&m.buyer], m.amount_mhz, m.unit_price_gwei)
        })
        .collect()
}

pub fn oracle(book: &Book) -> Vec<OracleMatch> {
    let side = |role| -> Vec<_> {
        book.iter()
            .enumerate()
            .filter(|(_, o)| o.0 == role)
            .map(|(i, &(_, bw, price))| (price, bw, i))
            .collect()
    };
    oracle_match(&OracleInstance { asks: side(Role::Seller), bids: side(Role::Buyer) })
}
