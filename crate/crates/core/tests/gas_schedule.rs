use moss::gas::{ether_cost, GasKey, GasPrice, GasSchedule, WEI_PER_ETHER, WEI_PER_GWEI};
use num_rational::Ratio;

/// Published cost tables at 4.3 Gwei: (function, gas, printed ether).
/// The orderResponse row carries two values, one per caller role.
const PUBLISHED: [(GasKey, u64, f64); 16] = [
    (GasKey::Deploy, 4_767_204, 2.04989e-2),
    (GasKey::RegistrationEnd, 21_799, 9.37357e-5),
    (GasKey::SortAskByIncrease, 70_696, 3.0399e-4),
    (GasKey::SortBidByDecrease, 116_557, 5.01195e-4),
    (GasKey::DoubleAuction, 368_357, 1.583935e-3),
    (GasKey::FreeTradeBegin, 42_413, 1.82375e-4),
    (GasKey::MarketEnd, 21_776, 9.35938e-5),
    (GasKey::PayOrNot, 29_018, 1.24777e-4),
    (GasKey::ChangeOwner, 28_811, 1.23887e-4),
    (GasKey::SelfDestruct, 13_495, 5.8028e-5),
    (GasKey::BidOrAskSubmit, 216_416, 1.00362e-3),
    (GasKey::DeleteOrder, 21_229, 9.12847e-5),
    (GasKey::OrderResponseBuyer, 24_277, 1.0439e-4),
    (GasKey::OrderResponseSeller, 35_085, 1.5086e-4),
    (GasKey::Withdraw, 22_188, 9.5408e-5),
    (GasKey::IncreaseFunds, 26_757, 1.15055e-4),
];

/// Rows whose printed ether does not equal gas x 4.3 Gwei.
const INCONSISTENT: [GasKey; 2] = [GasKey::BidOrAskSubmit, GasKey::MarketEnd];

fn relative_error(key: GasKey, gas: u64, printed: f64) -> f64 {
    let price: GasPrice = "4.3".parse().unwrap();
    let wei = ether_cost(gas, &price);
    // independent arithmetic: gas * 43 / 10 Gwei
    assert_eq!(wei, Ratio::from_integer(gas as u128 * 43 * WEI_PER_GWEI / 10), "{key:?}");
    let eth = *wei.numer() as f64 / *wei.denom() as f64 / WEI_PER_ETHER as f64;
    (eth - printed).abs() / printed
}

#[test]
fn default_schedule_is_the_published_gas() {
    let schedule = GasSchedule::default();
    for (key, gas, _) in PUBLISHED {
        assert_eq!(schedule.gas(key), gas, "{key:?}");
    }
    assert_eq!(GasKey::ALL.len(), PUBLISHED.len());
}

#[test]
fn consistent_rows_match_printed_ether() {
    let mut checked = 0;
    for (key, gas, printed) in PUBLISHED.into_iter().filter(|r| !INCONSISTENT.contains(&r.0)) {
        let err = relative_error(key, gas, printed);
        assert!(err < 1e-4, "{key:?}: relative error {err}");
        checked += 1;
    }
    // 13 table rows, orderResponse counted once with both values
    assert_eq!(checked, 14);
}

#[test]
fn flagged_rows_really_disagree() {
    for (key, gas, printed) in PUBLISHED.into_iter().filter(|r| INCONSISTENT.contains(&r.0)) {
        assert!(relative_error(key, gas, printed) > 1e-4, "{key:?}");
    }
}

#[test]
fn fees_round_up_to_whole_wei() {
    let third = GasPrice::new(1, 3).unwrap();
    let schedule = GasSchedule::default().with_price(third);
    // 21799 gas at 1/3 Gwei = 7266333333333.33 wei
    assert_eq!(schedule.fee_wei(GasKey::RegistrationEnd), 7_266_333_333_334);
    assert_eq!(GasSchedule::default().fee_wei(GasKey::Deploy), 20_498_977_200_000_000);
}

#[test]
fn price_parsing() {
    for (text, numer, denom) in [("4.3", 43, 10), ("20", 20, 1), ("0.125", 1, 8)] {
        let price: GasPrice = text.parse().unwrap();
        assert_eq!(price.gwei(), Ratio::new(numer, denom), "{text}");
    }
    for bad in ["", "-1", "abc", "1.2.3", "1e3"] {
        assert!(bad.parse::<GasPrice>().is_err(), "{bad:?}");
    }
}
