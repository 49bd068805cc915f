use crate::crypto::{Address, SigningKey};
use crate::gas::{WEI_PER_ETHER, WEI_PER_GWEI};
use crate::oracle::{oracle_match, OracleInstance};
use crate::registry::Role;

use super::*;

fn addr(name: &str) -> Address {
    SigningKey::from_seed(name).address()
}

fn env(sender: Address, value_wei: u128, now: u64) -> Env {
    Env { sender, value_wei, now, block_height: now }
}

const T0: u64 = 1000;
const T_BID: u64 = 600;
const T_FREE: u64 = 600;

fn admin() -> Address {
    addr("admin")
}

fn fresh() -> ContractState {
    ContractState::deploy(&env(admin(), 0, T0), &admin(), T_BID, T_FREE).unwrap()
}

/// The six operators of the reference round: three sellers then three buyers.
fn six_orders() -> Vec<(&'static str, Role, u64, u64)> {
    vec![
        ("op1", Role::Seller, 20, 2_000_000),
        ("op2", Role::Seller, 10, 1_600_000),
        ("op3", Role::Seller, 15, 2_400_000),
        ("op4", Role::Buyer, 10, 1_500_000),
        ("op5", Role::Buyer, 12, 2_500_000),
        ("op6", Role::Buyer, 8, 1_800_000),
    ]
}

fn registered(orders: &[(&str, Role, u64, u64)]) -> ContractState {
    let mut c = fresh();
    for (i, (name, role, bw, price)) in orders.iter().enumerate() {
        c.bid_or_ask_submit(&env(addr(name), WEI_PER_ETHER, T0 + 10 + i as u64), *role, *bw, *price).unwrap();
    }
    c
}

fn auctioned(orders: &[(&str, Role, u64, u64)]) -> (ContractState, Vec<MatchRecord>) {
    let mut c = registered(orders);
    let now = T0 + T_BID + 1;
    assert!(c.registration_end(&env(admin(), 0, now)).unwrap());
    c.sort_ask_by_increase(&env(admin(), 0, now)).unwrap();
    c.sort_bid_by_decrease(&env(admin(), 0, now)).unwrap();
    let m = c.double_auction(&env(admin(), 0, now)).unwrap();
    (c, m)
}

fn in_free_market() -> ContractState {
    let (mut c, _) = auctioned(&six_orders());
    c.free_trade_begin(&env(admin(), 0, 1700)).unwrap();
    c
}

/// Runs `op` and checks that on error the state is byte-for-byte unchanged.
fn assert_rejects<T: std::fmt::Debug>(
    c: &mut ContractState,
    expected: ContractError,
    op: impl FnOnce(&mut ContractState) -> Result<T, ContractError>,
) {
    let before = c.clone();
    let err = op(c).unwrap_err();
    assert_eq!(err, expected);
    assert_eq!(*c, before, "state changed on {expected:?}");
}

#[test]
fn submit_records_order_deposit_and_event() {
    let mut c = fresh();
    let op1 = addr("op1");
    c.bid_or_ask_submit(&env(op1, WEI_PER_ETHER, 1010), Role::Seller, 20, 2_000_000).unwrap();
    assert_eq!(c.asks, vec![Order { owner: op1, role: Role::Seller, unit_price_gwei: 2_000_000, bandwidth_mhz: 20 }]);
    assert_eq!(c.deposit_of(&op1), WEI_PER_ETHER);
    assert!(matches!(c.events[0].kind, EventKind::LogRegisterOp { bandwidth_mhz: 20, .. }));
}

#[test]
fn submit_error_paths_leave_state_unchanged() {
    let mut c = registered(&six_orders()[..1]);
    let op1 = addr("op1");
    let op9 = addr("op9");
    assert_rejects(&mut c, ContractError::InsufficientDeposit, |c| {
        c.bid_or_ask_submit(&env(op9, WEI_PER_ETHER - 1, 1100), Role::Buyer, 1, 1)
    });
    assert_rejects(&mut c, ContractError::ZeroQuantity, |c| {
        c.bid_or_ask_submit(&env(op9, WEI_PER_ETHER, 1100), Role::Buyer, 0, 1)
    });
    assert_rejects(&mut c, ContractError::ZeroQuantity, |c| {
        c.bid_or_ask_submit(&env(op9, WEI_PER_ETHER, 1100), Role::Buyer, 1, 0)
    });
    assert_rejects(&mut c, ContractError::DuplicateRegistration, |c| {
        c.bid_or_ask_submit(&env(op1, WEI_PER_ETHER, 1100), Role::Seller, 1, 1)
    });
    assert_rejects(&mut c, ContractError::RegistrationClosed, |c| {
        c.bid_or_ask_submit(&env(op9, WEI_PER_ETHER, T0 + T_BID + 1), Role::Buyer, 1, 1)
    });
}

#[test]
fn registration_window_is_closed_on_both_ends() {
    let mut c = fresh();
    c.bid_or_ask_submit(&env(addr("a"), WEI_PER_ETHER, T0 + T_BID), Role::Buyer, 1, 1).unwrap();
    assert!(!c.registration_end(&env(admin(), 0, T0 + T_BID)).unwrap());
    assert_eq!(c.phase, Phase::Registration);
    assert!(c.registration_end(&env(addr("anyone"), 0, T0 + T_BID + 1)).unwrap());
    assert_eq!(c.phase, Phase::AuctionReady);
}

#[test]
fn sorts_are_stable_and_owner_only() {
    let orders = vec![
        ("s1", Role::Seller, 1, 30),
        ("s2", Role::Seller, 2, 10),
        ("s3", Role::Seller, 3, 30),
        ("s4", Role::Seller, 4, 10),
        ("b1", Role::Buyer, 1, 5),
        ("b2", Role::Buyer, 2, 7),
        ("b3", Role::Buyer, 3, 5),
    ];
    let mut c = registered(&orders);
    let now = T0 + T_BID + 1;
    assert_rejects(&mut c, ContractError::WrongPhase(Phase::Registration), |c| {
        c.sort_ask_by_increase(&env(admin(), 0, now))
    });
    c.registration_end(&env(admin(), 0, now)).unwrap();
    assert_rejects(&mut c, ContractError::NotAdministrator, |c| c.sort_ask_by_increase(&env(addr("s1"), 0, now)));
    c.sort_ask_by_increase(&env(admin(), 0, now)).unwrap();
    c.sort_bid_by_decrease(&env(admin(), 0, now)).unwrap();
    let ask_owners: Vec<_> = c.asks.iter().map(|o| o.owner).collect();
    assert_eq!(ask_owners, vec![addr("s2"), addr("s4"), addr("s1"), addr("s3")]);
    let bid_owners: Vec<_> = c.bids.iter().map(|o| o.owner).collect();
    assert_eq!(bid_owners, vec![addr("b2"), addr("b1"), addr("b3")]);
}

#[test]
fn six_operator_auction_matches() {
    let (c, matches) = auctioned(&six_orders());
    let got: Vec<_> = matches.iter().map(|m| (m.seller, m.buyer, m.amount_mhz, m.unit_price_gwei)).collect();
    assert_eq!(
        got,
        vec![(addr("op2"), addr("op5"), 10, 2_050_000), (addr("op1"), addr("op5"), 2, 2_250_000)]
    );
    // residual books after the auction
    let asks: Vec<_> = c.asks.iter().map(|o| (o.owner, o.bandwidth_mhz)).collect();
    assert_eq!(asks, vec![(addr("op1"), 18), (addr("op3"), 15)]);
    let bids: Vec<_> = c.bids.iter().map(|o| (o.owner, o.bandwidth_mhz)).collect();
    assert_eq!(bids, vec![(addr("op6"), 8), (addr("op4"), 10)]);
    assert_eq!(c.phase, Phase::Auctioned);
    assert_eq!(
        c.deposit_of(&addr("op5")),
        WEI_PER_ETHER - (10 * 2_050_000 + 2 * 2_250_000) as u128 * WEI_PER_GWEI
    );
    assert_eq!(c.deposit_of(&addr("op2")), WEI_PER_ETHER + 10 * 2_050_000 * WEI_PER_GWEI);
}

#[test]
fn auction_agrees_with_oracle_on_six_operators() {
    let orders = six_orders();
    let (_, matches) = auctioned(&orders);
    let tag = |a: &Address| orders.iter().position(|o| addr(o.0) == *a).unwrap();
    let instance = OracleInstance {
        asks: orders.iter().enumerate().filter(|(_, o)| o.1 == Role::Seller).map(|(i, o)| (o.3, o.2, i)).collect(),
        bids: orders.iter().enumerate().filter(|(_, o)| o.1 == Role::Buyer).map(|(i, o)| (o.3, o.2, i)).collect(),
    };
    let got: Vec<_> =
        matches.iter().map(|m| (tag(&m.seller), tag(&m.buyer), m.amount_mhz, m.unit_price_gwei)).collect();
    assert_eq!(got, oracle_match(&instance));
}

#[test]
fn one_buyer_absorbs_three_sellers() {
    let orders = vec![
        ("s1", Role::Seller, 10, 10),
        ("s2", Role::Seller, 10, 20),
        ("s3", Role::Seller, 10, 30),
        ("b", Role::Buyer, 30, 100),
    ];
    let (c, matches) = auctioned(&orders);
    let prices: Vec<_> = matches.iter().map(|m| m.unit_price_gwei).collect();
    assert_eq!(prices, vec![55, 60, 65]);
    assert!(c.asks.is_empty() && c.bids.is_empty());
}

#[test]
fn crossed_books_produce_no_matches() {
    let (c, matches) = auctioned(&[("s", Role::Seller, 5, 50), ("b", Role::Buyer, 5, 40)]);
    assert!(matches.is_empty());
    assert_eq!(c.phase, Phase::Auctioned);
    assert_eq!(c.asks.len(), 1);
}

#[test]
fn underfunded_buyer_is_skipped() {
    // 1 ether buys at most 1e9 gwei; this bid needs 2e9
    let orders = vec![("s", Role::Seller, 10, 100_000_000), ("b1", Role::Buyer, 10, 300_000_000), ("b2", Role::Buyer, 5, 100_000_000)];
    let (c, matches) = auctioned(&orders);
    assert_eq!(matches.len(), 1);
    assert_eq!(matches[0].buyer, addr("b2"));
    assert_eq!(matches[0].amount_mhz, 5);
    assert!(c.events.iter().any(|e| matches!(e.kind, EventKind::LogBuyerUnderfunded { buyer, .. } if buyer == addr("b1"))));
    assert_eq!(c.deposit_of(&addr("b1")), WEI_PER_ETHER);
}

#[test]
fn auction_preconditions() {
    let mut c = registered(&six_orders());
    let now = T0 + T_BID + 1;
    assert_rejects(&mut c, ContractError::WrongPhase(Phase::Registration), |c| c.double_auction(&env(admin(), 0, now)));
    c.registration_end(&env(admin(), 0, now)).unwrap();
    assert_rejects(&mut c, ContractError::BooksUnsorted, |c| c.double_auction(&env(admin(), 0, now)));
    c.sort_ask_by_increase(&env(admin(), 0, now)).unwrap();
    assert_rejects(&mut c, ContractError::BooksUnsorted, |c| c.double_auction(&env(admin(), 0, now)));
    c.sort_bid_by_decrease(&env(admin(), 0, now)).unwrap();
    assert_rejects(&mut c, ContractError::NotAdministrator, |c| c.double_auction(&env(addr("op1"), 0, now)));
    c.double_auction(&env(admin(), 0, now)).unwrap();
    assert_rejects(&mut c, ContractError::AlreadyAuctioned, |c| c.double_auction(&env(admin(), 0, now)));
}

#[test]
fn free_trade_begin_checks() {
    let (mut c, _) = auctioned(&six_orders());
    assert_rejects(&mut c, ContractError::TooEarly, |c| c.free_trade_begin(&env(admin(), 0, T0 + T_BID)));
    assert_rejects(&mut c, ContractError::NotAdministrator, |c| c.free_trade_begin(&env(addr("op1"), 0, 1700)));
    c.free_trade_begin(&env(admin(), 0, 1700)).unwrap();
    assert_eq!(c.t1, Some(1700));
    assert_eq!(c.market_deadline(), Some(2300));
}

#[test]
fn free_market_repost_and_purchase() {
    let mut c = in_free_market();
    let (op1, op6) = (addr("op1"), addr("op6"));
    assert_eq!(c.order_response(&env(op1, 0, 1710), &op1, 1_800_000, 18).unwrap(), None);
    let rec = c.order_response(&env(op6, 0, 1720), &op1, 1_800_000, 8).unwrap().unwrap();
    assert_eq!((rec.seller, rec.buyer, rec.amount_mhz, rec.unit_price_gwei), (op1, op6, 8, 1_800_000));
    assert_eq!(rec.stage, Stage::FreeMarket);
    assert_eq!(rec.total_wei, 8 * 1_800_000 * WEI_PER_GWEI);
    // OP6 fully served; OP1 keeps 10 MHz posted
    assert!(c.bids.iter().all(|o| o.owner != op6));
    assert_eq!(c.asks.iter().find(|o| o.owner == op1).unwrap().bandwidth_mhz, 10);
}

#[test]
fn purchase_takes_at_most_the_posted_amount() {
    let mut c = in_free_market();
    let (op1, op4) = (addr("op1"), addr("op4"));
    c.order_response(&env(op1, 0, 1710), &op1, 1_000_000, 3).unwrap();
    let rec = c.order_response(&env(op4, 0, 1720), &op1, 1_000_000, 10).unwrap().unwrap();
    assert_eq!(rec.amount_mhz, 3);
    assert_eq!(c.bids.iter().find(|o| o.owner == op4).unwrap().bandwidth_mhz, 7);
    assert!(c.asks.iter().all(|o| o.owner != op1));
}

#[test]
fn free_market_error_paths() {
    let mut c = in_free_market();
    let (op1, op3, op4, op5) = (addr("op1"), addr("op3"), addr("op4"), addr("op5"));
    let stranger = addr("nobody");
    assert_rejects(&mut c, ContractError::PriceMismatch, |c| c.order_response(&env(op4, 0, 1720), &op1, 1, 1));
    assert_rejects(&mut c, ContractError::UnknownTarget, |c| c.order_response(&env(op4, 0, 1720), &stranger, 1, 1));
    assert_rejects(&mut c, ContractError::WrongRole, |c| c.order_response(&env(op4, 0, 1720), &op4, 1, 1));
    assert_rejects(&mut c, ContractError::ExceedsRemaining, |c| c.order_response(&env(op1, 0, 1720), &op1, 5, 19));
    assert_rejects(&mut c, ContractError::ExceedsRemaining, |c| c.order_response(&env(op4, 0, 1720), &op3, 2_400_000, 11));
    assert_rejects(&mut c, ContractError::ZeroQuantity, |c| c.order_response(&env(op4, 0, 1720), &op3, 2_400_000, 0));
    assert_rejects(&mut c, ContractError::NoOrder, |c| c.order_response(&env(op5, 0, 1720), &op3, 2_400_000, 1));
    assert_rejects(&mut c, ContractError::WrongRole, |c| c.order_response(&env(op1, 0, 1720), &op3, 2_400_000, 1));
    assert_rejects(&mut c, ContractError::MarketClosed, |c| c.order_response(&env(op4, 0, 2301), &op3, 2_400_000, 1));
}

#[test]
fn free_market_underfunded_buyer() {
    let mut c = in_free_market();
    let (op3, op4) = (addr("op3"), addr("op4"));
    // 10 MHz at 1e9 gwei is 10 ether; OP4 deposited 1
    c.order_response(&env(op3, 0, 1710), &op3, 1_000_000_000, 10).unwrap();
    assert_rejects(&mut c, ContractError::BuyerUnderfunded, |c| c.order_response(&env(op4, 0, 1720), &op3, 1_000_000_000, 10));
    c.increase_funds(&env(op4, 10 * WEI_PER_ETHER, 1721)).unwrap();
    c.order_response(&env(op4, 0, 1722), &op3, 1_000_000_000, 10).unwrap();
}

#[test]
fn order_response_outside_free_trading() {
    let (mut c, _) = auctioned(&six_orders());
    let op1 = addr("op1");
    assert_rejects(&mut c, ContractError::WrongPhase(Phase::Auctioned), |c| c.order_response(&env(op1, 0, 1650), &op1, 1, 1));
}

#[test]
fn delete_order_removes_residual() {
    let mut c = in_free_market();
    let op4 = addr("op4");
    let removed = c.delete_order(&env(op4, 0, 1730)).unwrap();
    assert_eq!(removed.owner, op4);
    assert!(c.bids.iter().all(|o| o.owner != op4));
    assert_rejects(&mut c, ContractError::NoOrder, |c| c.delete_order(&env(op4, 0, 1731)));
    let mut early = registered(&six_orders());
    assert_rejects(&mut early, ContractError::WrongPhase(Phase::Registration), |c| c.delete_order(&env(op4, 0, 1100)));
}

#[test]
fn market_end_and_withdraw() {
    let mut c = in_free_market();
    let op1 = addr("op1");
    assert_rejects(&mut c, ContractError::WrongPhase(Phase::FreeTrading), |c| c.withdraw(&env(op1, 0, 2000)));
    assert!(!c.market_end(&env(admin(), 0, 2300)).unwrap());
    assert!(c.market_end(&env(admin(), 0, 2301)).unwrap());
    assert_eq!(c.phase, Phase::Cleared);
    let paid = c.withdraw(&env(op1, 0, 3001)).unwrap();
    assert_eq!(paid, WEI_PER_ETHER + 2 * 2_250_000 * WEI_PER_GWEI);
    assert_rejects(&mut c, ContractError::NothingToWithdraw, |c| c.withdraw(&env(op1, 0, 3002)));
}

#[test]
fn market_end_before_free_trade_begin() {
    let (mut c, _) = auctioned(&six_orders());
    assert_rejects(&mut c, ContractError::MarketNotOpened, |c| c.market_end(&env(admin(), 0, 5000)));
}

#[test]
fn punished_operator_cannot_withdraw() {
    let mut c = in_free_market();
    let op2 = addr("op2");
    c.market_end(&env(admin(), 0, 2301)).unwrap();
    assert_rejects(&mut c, ContractError::NotAdministrator, |c| c.pay_or_not(&env(op2, 0, 2500), &op2, false));
    assert_rejects(&mut c, ContractError::UnknownOperator, |c| c.pay_or_not(&env(admin(), 0, 2500), &addr("x"), false));
    c.pay_or_not(&env(admin(), 0, 2500), &op2, false).unwrap();
    assert_rejects(&mut c, ContractError::InvalidOp, |c| c.withdraw(&env(op2, 0, 3001)));
    assert_eq!(ContractError::InvalidOp.to_string(), "Invalid op");
    c.pay_or_not(&env(admin(), 0, 2501), &op2, true).unwrap();
    assert!(c.withdraw(&env(op2, 0, 3002)).unwrap() > WEI_PER_ETHER);
}

#[test]
fn increase_funds_checks() {
    let mut c = registered(&six_orders());
    assert_rejects(&mut c, ContractError::NotRegistered, |c| c.increase_funds(&env(addr("x"), 5, 1100)));
    assert_rejects(&mut c, ContractError::ZeroValue, |c| c.increase_funds(&env(addr("op1"), 0, 1100)));
    c.increase_funds(&env(addr("op1"), 5, 1100)).unwrap();
    assert_eq!(c.deposit_of(&addr("op1")), WEI_PER_ETHER + 5);
}

#[test]
fn change_owner_transfers_admin_rights() {
    let mut c = fresh();
    let new = addr("new-admin");
    assert_rejects(&mut c, ContractError::NotAdministrator, |c| c.change_owner(&env(new, 0, 1001), &new));
    c.change_owner(&env(admin(), 0, 1001), &new).unwrap();
    assert_eq!(c.owner, new);
    assert_rejects(&mut c, ContractError::NotAdministrator, |c| c.change_owner(&env(admin(), 0, 1002), &admin()));
}

#[test]
fn self_destruct_refunds_and_forfeits() {
    let mut c = in_free_market();
    c.market_end(&env(admin(), 0, 2301)).unwrap();
    let op2 = addr("op2");
    c.pay_or_not(&env(admin(), 0, 2500), &op2, false).unwrap();
    let held = c.held_wei();
    let op2_deposit = c.deposit_of(&op2);
    let payouts = c.self_destruct(&env(admin(), 0, 3000)).unwrap();
    assert_eq!(payouts.iter().map(|p| p.1).sum::<u128>(), held);
    assert!(payouts.contains(&(admin(), op2_deposit)));
    assert!(payouts.iter().all(|p| p.0 != op2));
    assert_eq!(c.held_wei(), 0);
    assert_eq!(c.phase, Phase::Destroyed);
    assert_rejects(&mut c, ContractError::Destroyed, |c| c.withdraw(&env(addr("op1"), 0, 3001)));
    assert_rejects(&mut c, ContractError::Destroyed, |c| c.registration_end(&env(admin(), 0, 3001)));
}

#[test]
fn self_destruct_needs_cleared_round() {
    let mut c = in_free_market();
    assert_rejects(&mut c, ContractError::WrongPhase(Phase::FreeTrading), |c| c.self_destruct(&env(admin(), 0, 2000)));
}

#[test]
fn phase_never_moves_backwards() {
    let mut c = fresh();
    let mut seen = vec![c.phase];
    c.bid_or_ask_submit(&env(addr("s"), WEI_PER_ETHER, 1001), Role::Seller, 1, 1).unwrap();
    type Step = Box<dyn Fn(&mut ContractState) -> Result<(), ContractError>>;
    let steps: Vec<Step> = vec![
        Box::new(|c| c.registration_end(&env(admin(), 0, 1601)).map(drop)),
        Box::new(|c| c.registration_end(&env(admin(), 0, 1602)).map(drop)),
        Box::new(|c| c.sort_ask_by_increase(&env(admin(), 0, 1603))),
        Box::new(|c| c.sort_bid_by_decrease(&env(admin(), 0, 1603))),
        Box::new(|c| c.double_auction(&env(admin(), 0, 1604)).map(drop)),
        Box::new(|c| c.registration_end(&env(admin(), 0, 1605)).map(drop)),
        Box::new(|c| c.free_trade_begin(&env(admin(), 0, 1700))),
        Box::new(|c| c.market_end(&env(admin(), 0, 2301)).map(drop)),
        Box::new(|c| c.market_end(&env(admin(), 0, 2302)).map(drop)),
        Box::new(|c| c.self_destruct(&env(admin(), 0, 3000)).map(drop)),
    ];
    for step in steps {
        step(&mut c).unwrap();
        seen.push(c.phase);
    }
    assert!(seen.windows(2).all(|w| w[0] <= w[1]), "{seen:?}");
    assert_eq!(*seen.last().unwrap(), Phase::Destroyed);
}

#[test]
fn call_gas_key_distinguishes_order_response_roles() {
    use crate::gas::GasKey;
    let me = addr("me");
    let other = addr("other");
    let repost = Call::OrderResponse { target: me, price_gwei: 1, bandwidth_mhz: 1 };
    let buy = Call::OrderResponse { target: other, price_gwei: 1, bandwidth_mhz: 1 };
    assert_eq!(repost.gas_key(&me), GasKey::OrderResponseSeller);
    assert_eq!(buy.gas_key(&me), GasKey::OrderResponseBuyer);
}
