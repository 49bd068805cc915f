use std::collections::BTreeMap;

use thiserror::Error;

use crate::codec::Encode;
use crate::consensus::{
    NetworkConfig, ProposeError, SafetyReport, SafetyViolation, SimConfig, SimError, Simulation,
};
use crate::contract::{Call, CallOutput, Receipt, World};
use crate::crypto::{Address, Hash32, SigningKey};
use crate::gas::{GasPrice, GasSchedule, WEI_PER_ETHER, WEI_PER_GWEI};
use crate::ledger::store::encode_chain_file;
use crate::ledger::{Transaction, TxRejection};
use crate::registry::{validate_seller_constraint, IdentityRegistry, OperatorProfile, Role};

use super::config::{Action, ScenarioConfig, Step, ADMIN};
use super::genesis::Genesis;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub gas_price: Option<GasPrice>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    ConfigInvalid(Vec<String>),
    #[error("script step {step} ({actor} {action} at {at}) expected {expected}, got {got}")]
    Diverged { step: usize, at: u64, actor: String, action: &'static str, expected: String, got: String },
    #[error("script step {step} was left out of its block: {reason}")]
    Excluded { step: usize, reason: TxRejection },
    #[error("proposal failed: {0}")]
    Propose(#[from] ProposeError),
    #[error("consensus did not finish: {0}")]
    Consensus(#[from] SimError),
    #[error("safety audit failed: {0}")]
    Safety(#[from] SafetyViolation),
    #[error("conservation broken at height {height}: expected {expected} wei, found {found} wei")]
    ConservationBroken { height: u64, expected: u128, found: u128 },
    #[error("honest replica {replica} replays to a different state")]
    ReplicaDivergence { replica: u32 },
}

/// Outcome of one transaction, tied back to the script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    /// Index into `script`; `None` for the deploy transaction.
    pub step: Option<usize>,
    pub at: u64,
    pub actor: String,
    pub receipt: Receipt,
}

impl StepRecord {
    /// `"ok"` or the revert code.
    pub fn outcome(&self) -> &'static str {
        match &self.receipt.result {
            Ok(_) => "ok",
            Err(e) => e.code(),
        }
    }

    pub fn output(&self) -> Option<&CallOutput> {
        self.receipt.result.as_ref().ok()
    }
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub gas_price: GasPrice,
    pub genesis: Genesis,
    pub world: World,
    pub names: BTreeMap<Address, String>,
    pub initial_balances: BTreeMap<Address, u128>,
    pub records: Vec<StepRecord>,
    /// `(height, total wei)` after every block.
    pub conservation: Vec<(u64, u128)>,
    pub chain_file: Vec<u8>,
    pub head_digest: Hash32,
    pub state_digest: Hash32,
    pub safety: SafetyReport,
    pub trace_jsonl: String,
    pub honest_replicas: Vec<u32>,
}

impl ScenarioRun {
    pub fn name_of(&self, address: &Address) -> String {
        self.names.get(address).cloned().unwrap_or_else(|| address.to_hex())
    }

    pub fn address_of(&self, name: &str) -> Option<Address> {
        self.names.iter().find(|(_, n)| n.as_str() == name).map(|(a, _)| *a)
    }

    pub fn blocks(&self) -> u64 {
        self.conservation.len() as u64
    }
}

struct Actor {
    key: SigningKey,
    next_nonce: u64,
}

struct PendingTx {
    step: Option<usize>,
    at: u64,
    actor: String,
    call: Call,
    value_wei: u128,
}

pub fn run_scenario(config: &ScenarioConfig, options: &RunOptions) -> Result<ScenarioRun, ScenarioError> {
    let errors = config.validate();
    if !errors.is_empty() {
        return Err(ScenarioError::ConfigInvalid(errors));
    }

    let admin_key = SigningKey::from_seed(&config.admin.key_seed);
    let mut actors: BTreeMap<String, Actor> = BTreeMap::new();
    actors.insert(ADMIN.into(), Actor { key: admin_key.clone(), next_nonce: 0 });
    for op in &config.operators {
        actors.insert(op.id.clone(), Actor { key: SigningKey::from_seed(&op.key_seed), next_nonce: 0 });
    }
    let names: BTreeMap<Address, String> = actors.iter().map(|(name, a)| (a.key.address(), name.clone())).collect();
    if names.len() != actors.len() {
        return Err(ScenarioError::ConfigInvalid(vec!["operators: two actors share a key seed".into()]));
    }
    let address = |name: &str| actors[name].key.address();

    // membership: the administrator also transacts, so it is registered too
    let mut registry = IdentityRegistry::new(admin_key.public_key());
    let mut identities = Vec::new();
    let mut diagnostics = Vec::new();
    identities.push(registry.register_operator(&admin_key, ADMIN, admin_key.public_key()).expect("fresh registry"));
    for op in &config.operators {
        let identity = registry
            .register_operator(&admin_key, &op.id, actors[&op.id].key.public_key())
            .expect("ids validated unique");
        let profile = OperatorProfile {
            identity: identity.clone(),
            role: op.role,
            total_bandwidth_mhz: op.total_bandwidth_mhz.unwrap_or(0),
            required_bandwidth_mhz: op.required_bandwidth_mhz.unwrap_or(0),
            offered_or_demanded_mhz: op.bandwidth_mhz,
            unit_price_gwei: op.unit_price_gwei,
        };
        if op.role == Role::Seller && !validate_seller_constraint(&profile).unwrap_or(false) {
            diagnostics.push(format!("{}: seller bandwidth constraint violated", op.id));
        }
        identities.push(identity);
    }
    if !diagnostics.is_empty() {
        return Err(ScenarioError::ConfigInvalid(diagnostics));
    }

    let mut balances = BTreeMap::new();
    balances.insert(address(ADMIN), config.admin.initial_balance_eth as u128 * WEI_PER_ETHER);
    for op in &config.operators {
        balances.insert(address(&op.id), op.initial_balance_eth as u128 * WEI_PER_ETHER);
    }

    let gas_price = match (&options.gas_price, &config.gas.price_gwei) {
        (Some(price), _) => *price,
        (None, Some(text)) => text.parse().expect("validated"),
        (None, None) => GasPrice::default(),
    };
    let mut schedule = GasSchedule::default().with_price(gas_price);
    for (key, gas) in &config.gas.overrides {
        schedule.set(*key, *gas);
    }

    let seed = options.seed.unwrap_or(config.consensus.seed);
    let c = &config.consensus;
    let sim_config = SimConfig {
        replicas: c.replicas,
        network: NetworkConfig {
            seed,
            min_delay: c.min_delay,
            max_delay: c.max_delay,
            lossy_edges: c.lossy_edges.clone(),
        },
        max_batch: c.max_batch,
        allow_empty: false,
        retransmit_interval: c.retransmit_interval,
        behaviors: c.faults.iter().map(|f| (f.replica, f.behavior)).collect(),
    };
    let mut sim = Simulation::new(sim_config, registry);
    let honest: Vec<u32> = sim.honest_ids().into_iter().collect();
    let Some(&reference) = honest.first() else {
        return Err(ScenarioError::ConfigInvalid(vec!["consensus.faults: no honest replica left".into()]));
    };

    let genesis = Genesis {
        name: config.name.clone(),
        replica_keys: sim.replica_keys(),
        admin_key: admin_key.public_key(),
        identities,
        balances: balances.iter().map(|(a, w)| (*a, *w)).collect(),
        schedule: schedule.clone(),
    };
    let mut world = genesis.world();
    let total = world.total_wei();

    // block 0 deploys the contract at t0
    let mut blocks: Vec<(u64, Vec<PendingTx>)> = vec![(
        config.timing.t0,
        vec![PendingTx {
            step: None,
            at: config.timing.t0,
            actor: ADMIN.into(),
            call: Call::Deploy { t_bid: config.timing.t_bid, t_free: config.timing.t_free },
            value_wei: 0,
        }],
    )];
    let mut i = 0;
    while i < config.script.len() {
        let at = config.script[i].at;
        let mut group = Vec::new();
        while i < config.script.len() && config.script[i].at == at {
            group.push(pending(config, i, &config.script[i], &address));
            i += 1;
        }
        let mut group = group.into_iter().peekable();
        while group.peek().is_some() {
            let chunk: Vec<_> = group.by_ref().take(c.max_batch).collect();
            let last = blocks.last().map(|(ts, _)| *ts).unwrap_or(0);
            blocks.push((at.max(last + 1), chunk));
        }
    }

    let mut records = Vec::new();
    let mut conservation = Vec::new();
    for (height, (timestamp, txs)) in blocks.into_iter().enumerate() {
        let height = height as u64;
        let mut signed = Vec::new();
        for p in &txs {
            let actor = actors.get_mut(&p.actor).expect("actors validated");
            let tx = Transaction::signed(
                &actor.key,
                p.call.function_id(),
                p.call.encode_payload(),
                p.value_wei,
                actor.next_nonce,
                timestamp,
            );
            actor.next_nonce += 1;
            sim.submit(tx.clone());
            signed.push(tx);
        }
        let proposal = sim.propose_batch(signed.clone(), timestamp)?;
        if let Some((digest, reason)) = proposal.excluded.first() {
            let index = signed.iter().position(|tx| tx.digest() == *digest).expect("excluded tx was proposed");
            return Err(ScenarioError::Excluded { step: txs[index].step.unwrap_or(0), reason: *reason });
        }
        sim.run_until_quiescent(c.max_steps)?;

        let block = &sim.replicas()[reference as usize].chain().blocks()[height as usize];
        let receipts = world.apply_block(block);
        let found = world.total_wei();
        if found != total {
            return Err(ScenarioError::ConservationBroken { height, expected: total, found });
        }
        conservation.push((height, found));

        for (p, receipt) in txs.into_iter().zip(receipts) {
            let record = StepRecord { step: p.step, at: p.at, actor: p.actor, receipt };
            if let Some(index) = record.step {
                check_expectation(&config.script[index], index, &record)?;
            } else if record.receipt.result.is_err() {
                return Err(ScenarioError::Diverged {
                    step: 0,
                    at: record.at,
                    actor: record.actor.clone(),
                    action: "deploy",
                    expected: "ok".into(),
                    got: record.outcome().into(),
                });
            }
            records.push(record);
        }
    }

    let safety = sim.audit()?;
    let state_digest = world.state_digest();
    for &id in &honest {
        let mut replay = genesis.world();
        for (block, _) in sim.committed(id) {
            replay.apply_block(block);
        }
        if replay.state_digest() != state_digest {
            return Err(ScenarioError::ReplicaDivergence { replica: id });
        }
    }

    let reference_replica = &sim.replicas()[reference as usize];
    let chain_file = encode_chain_file(&genesis.to_bytes(), sim.committed(reference));
    let head_digest = reference_replica.chain().head_digest();

    Ok(ScenarioRun {
        config: config.clone(),
        seed,
        gas_price,
        genesis,
        world,
        names,
        initial_balances: balances,
        records,
        conservation,
        chain_file,
        head_digest,
        state_digest,
        safety,
        trace_jsonl: sim.trace_jsonl(),
        honest_replicas: honest,
    })
}

fn pending(config: &ScenarioConfig, index: usize, step: &Step, address: &impl Fn(&str) -> Address) -> PendingTx {
    let gwei = |g: u64| g as u128 * WEI_PER_GWEI;
    let (call, value_wei) = match &step.action {
        Action::Submit { deposit_gwei, bandwidth_mhz, unit_price_gwei } => {
            let op = config.operator(&step.actor).expect("validated actor");
            let call = Call::BidOrAskSubmit {
                role: op.role,
                bandwidth_mhz: bandwidth_mhz.unwrap_or(op.bandwidth_mhz),
                unit_price_gwei: unit_price_gwei.unwrap_or(op.unit_price_gwei),
            };
            (call, deposit_gwei.map_or(WEI_PER_ETHER, gwei))
        }
        Action::RegistrationEnd => (Call::RegistrationEnd, 0),
        Action::SortAsks => (Call::SortAskByIncrease, 0),
        Action::SortBids => (Call::SortBidByDecrease, 0),
        Action::DoubleAuction => (Call::DoubleAuction, 0),
        Action::FreeTradeBegin => (Call::FreeTradeBegin, 0),
        Action::Resubmit { price_gwei, bandwidth_mhz } => (
            Call::OrderResponse { target: address(&step.actor), price_gwei: *price_gwei, bandwidth_mhz: *bandwidth_mhz },
            0,
        ),
        Action::Purchase { seller, price_gwei, bandwidth_mhz } => (
            Call::OrderResponse { target: address(seller), price_gwei: *price_gwei, bandwidth_mhz: *bandwidth_mhz },
            0,
        ),
        Action::Delete => (Call::DeleteOrder, 0),
        Action::MarketEnd => (Call::MarketEnd, 0),
        Action::Punish { operator } => (Call::PayOrNot { operator: address(operator), executed: false }, 0),
        Action::PayOrNot { operator, executed } => {
            (Call::PayOrNot { operator: address(operator), executed: *executed }, 0)
        }
        Action::IncreaseFunds { amount_gwei } => (Call::IncreaseFunds, gwei(*amount_gwei)),
        Action::Withdraw => (Call::Withdraw, 0),
        Action::ChangeOwner { new_owner } => (Call::ChangeOwner { new_owner: address(new_owner) }, 0),
        Action::SelfDestruct => (Call::SelfDestruct, 0),
    };
    PendingTx { step: Some(index), at: step.at, actor: step.actor.clone(), call, value_wei }
}

fn check_expectation(step: &Step, index: usize, record: &StepRecord) -> Result<(), ScenarioError> {
    let got = record.outcome();
    let ok = match step.expect.as_deref() {
        None => got == "ok",
        Some("any") => true,
        Some(code) => code == got,
    };
    if ok {
        return Ok(());
    }
    Err(ScenarioError::Diverged {
        step: index,
        at: step.at,
        actor: step.actor.clone(),
        action: record.receipt.function_id.name(),
        expected: step.expect.clone().unwrap_or_else(|| "ok".into()),
        got: got.into(),
    })
}
