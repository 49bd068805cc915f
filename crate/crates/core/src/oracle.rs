//! Reference matcher for the double auction, used to cross-check the
//! contract. It works on plain tuples, keeps no deposits, and shares no code
//! with [`crate::contract`].
//!
//! It simulates the head-pointer description literally: two cursors walk the
//! sorted books, and each cursor advances when its head's remaining quantity
//! hits zero (both when they tie). Prices are the floored midpoint.

/// `(price, bandwidth, tag)` for one order.
pub type OracleOrder = (u64, u64, usize);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleInstance {
    pub asks: Vec<OracleOrder>,
    pub bids: Vec<OracleOrder>,
}

/// `(seller_tag, buyer_tag, amount, unit_price)`
pub type OracleMatch = (usize, usize, u64, u64);

pub fn oracle_match(instance: &OracleInstance) -> Vec<OracleMatch> {
    // ascending asks, descending bids; ties keep input order
    let mut asks = instance.asks.clone();
    let mut bids = instance.bids.clone();
    insertion_sort_by(&mut asks, |a, b| a.0 > b.0);
    insertion_sort_by(&mut bids, |a, b| a.0 < b.0);

    let mut ask_left: Vec<u64> = asks.iter().map(|o| o.1).collect();
    let mut bid_left: Vec<u64> = bids.iter().map(|o| o.1).collect();
    let (mut i, mut j) = (0usize, 0usize);
    let mut out = Vec::new();

    while i < asks.len() && j < bids.len() {
        let (p, _, seller) = asks[i];
        let (c, _, buyer) = bids[j];
        if c < p {
            break;
        }
        let amount = if ask_left[i] < bid_left[j] { ask_left[i] } else { bid_left[j] };
        let price = (p + c) / 2;
        out.push((seller, buyer, amount, price));
        ask_left[i] -= amount;
        bid_left[j] -= amount;
        if bid_left[j] == 0 {
            j += 1;
        }
        if ask_left[i] == 0 {
            i += 1;
        }
    }
    out
}

/// Stable insertion sort: moves an element left while `out_of_order(prev, cur)`.
fn insertion_sort_by<T: Copy>(items: &mut [T], out_of_order: impl Fn(&T, &T) -> bool) {
    for k in 1..items.len() {
        let mut m = k;
        while m > 0 && out_of_order(&items[m - 1], &items[m]) {
            items.swap(m - 1, m);
            m -= 1;
        }
    }
}
