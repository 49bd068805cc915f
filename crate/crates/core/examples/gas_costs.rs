//! Prints the default gas schedule with exact ether costs at 4.3 Gwei and at
//! a price given on the command line.
//!
//!     cargo run --example gas_costs [-- 20]

use moss::gas::{ether_cost, GasKey, GasPrice, GasSchedule};
use moss::scenario::format_eth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let custom: GasPrice = std::env::args().nth(1).as_deref().unwrap_or("20").parse()?;
    let default = GasSchedule::default();
    let other = GasSchedule::default().with_price(custom);

    println!("{:<20} {:>9}  {:>22}  {:>22}", "function", "gas", "eth @ 4.3 Gwei", format!("eth @ {custom} Gwei"));
    for key in GasKey::ALL {
        println!(
            "{:<20} {:>9}  {:>22}  {:>22}",
            format!("{key:?}"),
            default.gas(key),
            format_eth(default.fee_wei(key)),
            format_eth(other.fee_wei(key))
        );
    }

    // fees are exact rationals until rounded up to whole wei
    let third = GasPrice::new(1, 3)?;
    let exact = ether_cost(21_799, &third);
    println!("\nRegistrationEnd at 1/3 Gwei: {exact} wei exact, charged {} wei", exact.ceil());
    Ok(())
}
