//! Random scenarios for property tests. The template supplies timing, gas
//! and consensus defaults; operators and the script are drawn from the seed.
//! Every generated step accepts any outcome, so a generated run only fails on
//! a broken invariant, never on an expected revert.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::consensus::Behavior;
use crate::registry::Role;

use super::config::{Action, Fault, OperatorConfig, ScenarioConfig, Step, ADMIN};

const GWEI_PER_ETH: u64 = 1_000_000_000;

pub fn generate(seed: u64, template: &ScenarioConfig) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut config = template.clone();
    config.name = format!("{}-{seed}", template.name);
    config.consensus.seed = rng.gen_range(0..1 << 32);
    config.consensus.max_delay = config.consensus.min_delay + rng.gen_range(0..20);
    config.consensus.faults.clear();
    if config.consensus.replicas >= 4 && rng.gen_bool(0.3) {
        let behavior = *[Behavior::Silent, Behavior::Equivocating, Behavior::Corrupting].choose(&mut rng).unwrap();
        let replica = rng.gen_range(1..config.consensus.replicas as u32);
        config.consensus.faults.push(Fault { replica, behavior });
    }

    let sellers = rng.gen_range(1..=5);
    let buyers = rng.gen_range(1..=5);
    config.operators = (0..sellers + buyers)
        .map(|i| {
            let role = if i < sellers { Role::Seller } else { Role::Buyer };
            let bandwidth_mhz = rng.gen_range(1..=20);
            // mostly cheap orders, sometimes ones a 1 eth deposit cannot cover
            let unit_price_gwei =
                if rng.gen_bool(0.8) { rng.gen_range(1..=100) } else { rng.gen_range(1_000_000..=200_000_000) };
            let required = rng.gen_range(0..=10);
            OperatorConfig {
                id: format!("OP{}", i + 1),
                role,
                key_seed: format!("fuzz-{seed}-op-{i}"),
                bandwidth_mhz,
                unit_price_gwei,
                total_bandwidth_mhz: (role == Role::Seller).then_some(bandwidth_mhz + required),
                required_bandwidth_mhz: (role == Role::Seller).then_some(required),
                initial_balance_eth: rng.gen_range(2..=100),
            }
        })
        .collect();

    let t = config.timing;
    let ids: Vec<String> = config.operators.iter().map(|o| o.id.clone()).collect();
    let seller_ids: Vec<String> = ids[..sellers].to_vec();
    let mut actors = ids.clone();
    actors.push(ADMIN.into());
    let mut steps: Vec<Step> = Vec::new();
    let mut push = |at: u64, actor: &str, action: Action| {
        steps.push(Step { at, actor: actor.to_string(), action, expect: Some("any".into()) })
    };

    for id in &ids {
        let deposit = if rng.gen_bool(0.1) { GWEI_PER_ETH / 2 } else { rng.gen_range(1..=3) * GWEI_PER_ETH };
        let at = t.t0 + rng.gen_range(1..=t.t_bid);
        push(at, id, Action::Submit { deposit_gwei: Some(deposit), bandwidth_mhz: None, unit_price_gwei: None });
        if rng.gen_bool(0.1) {
            push(at, id, Action::Submit { deposit_gwei: None, bandwidth_mhz: None, unit_price_gwei: None });
        }
    }
    if rng.gen_bool(0.3) {
        let id = ids.choose(&mut rng).unwrap();
        push(t.t0 + t.t_bid + 1, id, Action::Submit { deposit_gwei: None, bandwidth_mhz: None, unit_price_gwei: None });
    }

    let close = t.t0 + t.t_bid;
    push(close, ADMIN, Action::RegistrationEnd);
    push(close + 1, ADMIN, Action::RegistrationEnd);
    if rng.gen_bool(0.1) {
        push(close + 2, ADMIN, Action::DoubleAuction);
    }
    push(close + 3, ADMIN, Action::SortAsks);
    push(close + 3, ADMIN, Action::SortBids);
    push(close + 4, ADMIN, Action::DoubleAuction);
    if rng.gen_bool(0.1) {
        push(close + 4, ids.choose(&mut rng).unwrap(), Action::DoubleAuction);
    }
    push(t.t1, ADMIN, Action::FreeTradeBegin);

    let trades = rng.gen_range(0..12);
    for _ in 0..trades {
        let at = t.t1 + rng.gen_range(1..=t.t_free);
        let actor = ids.choose(&mut rng).unwrap().clone();
        let action = match rng.gen_range(0..5) {
            0 => Action::Resubmit { price_gwei: rng.gen_range(1..=120), bandwidth_mhz: rng.gen_range(1..=20) },
            1 | 2 => {
                let seller = seller_ids.choose(&mut rng).unwrap().clone();
                let posted = config.operators.iter().find(|o| o.id == seller).unwrap().unit_price_gwei;
                let price_gwei = if rng.gen_bool(0.7) { posted } else { rng.gen_range(1..=120) };
                Action::Purchase { seller, price_gwei, bandwidth_mhz: rng.gen_range(1..=20) }
            }
            3 => Action::Delete,
            _ => Action::IncreaseFunds { amount_gwei: rng.gen_range(1..=2 * GWEI_PER_ETH) },
        };
        push(at, &actor, action);
    }
    // an early withdrawal attempt and a stray call from a random actor
    if rng.gen_bool(0.3) {
        push(t.t1 + 1, ids.choose(&mut rng).unwrap(), Action::Withdraw);
    }
    if rng.gen_bool(0.3) {
        push(t.t1 + 1, actors.choose(&mut rng).unwrap(), Action::MarketEnd);
    }

    push(t.t1 + t.t_free + 1, ADMIN, Action::MarketEnd);
    for id in &ids {
        if rng.gen_bool(0.2) {
            push(t.tb, ADMIN, Action::Punish { operator: id.clone() });
        }
    }
    for id in &ids {
        push(t.te + 1, id, Action::Withdraw);
    }
    if rng.gen_bool(0.2) {
        push(t.te + 2, ADMIN, Action::ChangeOwner { new_owner: ids.choose(&mut rng).unwrap().clone() });
    }
    if rng.gen_bool(0.4) {
        push(t.te + 3, ADMIN, Action::SelfDestruct);
    }

    steps.sort_by_key(|s| s.at);
    config.script = steps;
    config
}
