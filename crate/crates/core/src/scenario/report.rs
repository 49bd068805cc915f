use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::contract::{CallOutput, EventKind, Stage};
use crate::crypto::{Address, Hash32};
use crate::gas::WEI_PER_ETHER;

use super::runner::ScenarioRun;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchRow {
    pub block_height: u64,
    pub stage: Stage,
    pub seller: String,
    pub buyer: String,
    pub amount_mhz: u64,
    pub unit_price_gwei: u64,
    pub total_wei: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceRow {
    pub name: String,
    pub address: Address,
    pub initial_wei: u128,
    pub final_wei: u128,
    /// Deposit still held by the contract.
    pub deposit_wei: u128,
    pub fees_wei: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectionRow {
    pub block_height: u64,
    pub actor: String,
    pub function: &'static str,
    pub code: &'static str,
}

/// Plain settlement summary of a run: every match, every final balance and
/// every punished operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SettlementReport {
    pub scenario: String,
    pub seed: u64,
    pub gas_price_gwei: String,
    pub blocks: u64,
    pub head_digest: Hash32,
    pub state_digest: Hash32,
    pub matches: Vec<MatchRow>,
    pub balances: Vec<BalanceRow>,
    pub punished: Vec<String>,
    pub rejections: Vec<RejectionRow>,
    pub fees_collected_wei: u128,
}

impl SettlementReport {
    pub fn from_run(run: &ScenarioRun) -> Self {
        let contract = run.world.contract.as_ref();
        let deal_heights: Vec<u64> = contract
            .map(|c| {
                c.events
                    .iter()
                    .filter(|e| matches!(e.kind, EventKind::LogDealRecord { .. }))
                    .map(|e| e.block_height)
                    .collect()
            })
            .unwrap_or_default();
        let matches = contract
            .map(|c| c.matches.as_slice())
            .unwrap_or_default()
            .iter()
            .zip(deal_heights)
            .map(|(m, block_height)| MatchRow {
                block_height,
                stage: m.stage,
                seller: run.name_of(&m.seller),
                buyer: run.name_of(&m.buyer),
                amount_mhz: m.amount_mhz,
                unit_price_gwei: m.unit_price_gwei,
                total_wei: m.total_wei,
            })
            .collect();

        let mut fees: BTreeMap<Address, u128> = BTreeMap::new();
        for record in &run.records {
            *fees.entry(record.receipt.sender).or_default() += record.receipt.fee_wei;
        }
        let balances = run
            .initial_balances
            .iter()
            .map(|(address, initial)| BalanceRow {
                name: run.name_of(address),
                address: *address,
                initial_wei: *initial,
                final_wei: run.world.balance(address),
                deposit_wei: contract.map_or(0, |c| c.deposit_of(address)),
                fees_wei: fees.get(address).copied().unwrap_or(0),
            })
            .collect();

        let punished = contract
            .map(|c| c.execute_or_not.iter().filter(|(_, ok)| !**ok).map(|(a, _)| run.name_of(a)).collect())
            .unwrap_or_default();

        let rejections = run
            .records
            .iter()
            .filter_map(|r| {
                r.receipt.result.as_ref().err().map(|e| RejectionRow {
                    block_height: r.receipt.block_height,
                    actor: r.actor.clone(),
                    function: r.receipt.function_id.name(),
                    code: e.code(),
                })
            })
            .collect();

        Self {
            scenario: run.config.name.clone(),
            seed: run.seed,
            gas_price_gwei: run.gas_price.to_string(),
            blocks: run.blocks(),
            head_digest: run.head_digest,
            state_digest: run.state_digest,
            matches,
            balances,
            punished,
            rejections,
            fees_collected_wei: run.world.fees_collected,
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario      {}", self.scenario);
        let _ = writeln!(s, "network seed  {}", self.seed);
        let _ = writeln!(s, "gas price     {} Gwei", self.gas_price_gwei);
        let _ = writeln!(s, "blocks        {}", self.blocks);
        let _ = writeln!(s, "head digest   {}", self.head_digest);
        let _ = writeln!(s, "state digest  {}", self.state_digest);

        let _ = writeln!(s, "\nmatches ({})", self.matches.len());
        let _ = writeln!(
            s,
            "  {:>6}  {:<11}  {:<10}  {:<10}  {:>8}  {:>16}  {:>24}",
            "block", "stage", "seller", "buyer", "MHz", "price (Gwei)", "total (eth)"
        );
        for m in &self.matches {
            let stage = match m.stage {
                Stage::Auction => "auction",
                Stage::FreeMarket => "free_market",
            };
            let _ = writeln!(
                s,
                "  {:>6}  {:<11}  {:<10}  {:<10}  {:>8}  {:>16}  {:>24}",
                m.block_height,
                stage,
                m.seller,
                m.buyer,
                m.amount_mhz,
                m.unit_price_gwei,
                format_eth(m.total_wei)
            );
        }

        let _ = writeln!(s, "\nbalances (eth)");
        let _ = writeln!(
            s,
            "  {:<10}  {:<42}  {:>24}  {:>24}  {:>22}  {:>22}",
            "account", "address", "initial", "final", "deposit held", "fees paid"
        );
        for b in &self.balances {
            let _ = writeln!(
                s,
                "  {:<10}  {:<42}  {:>24}  {:>24}  {:>22}  {:>22}",
                b.name,
                b.address.to_hex(),
                format_eth(b.initial_wei),
                format_eth(b.final_wei),
                format_eth(b.deposit_wei),
                format_eth(b.fees_wei)
            );
        }
        let _ = writeln!(s, "  fees collected: {} eth", format_eth(self.fees_collected_wei));

        let _ = writeln!(
            s,
            "\npunished: {}",
            if self.punished.is_empty() { "none".to_string() } else { self.punished.join(", ") }
        );

        let _ = writeln!(s, "\nrejected transactions ({})", self.rejections.len());
        for r in &self.rejections {
            let _ = writeln!(s, "  block {:>4}  {:<10}  {:<16}  {}", r.block_height, r.actor, r.function, r.code);
        }
        s
    }
}

/// Exact decimal ether, trailing zeros trimmed: `98.999069411200000000` -> `98.9990694112`.
pub fn format_eth(wei: u128) -> String {
    let int = wei / WEI_PER_ETHER;
    let frac = wei % WEI_PER_ETHER;
    if frac == 0 {
        return int.to_string();
    }
    let digits = format!("{frac:018}");
    format!("{int}.{}", digits.trim_end_matches('0'))
}

/// One line of the transaction log.
#[derive(Debug, Clone, Serialize)]
pub struct TxLogLine<'a> {
    pub block_height: u64,
    pub tx_index: usize,
    pub at: u64,
    pub actor: &'a str,
    pub function: &'static str,
    pub gas_used: u64,
    pub fee_wei: u128,
    pub outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<&'a CallOutput>,
}

pub fn tx_log(run: &ScenarioRun) -> Vec<TxLogLine<'_>> {
    run.records
        .iter()
        .map(|r| TxLogLine {
            block_height: r.receipt.block_height,
            tx_index: r.receipt.tx_index,
            at: r.at,
            actor: &r.actor,
            function: r.receipt.function_id.name(),
            gas_used: r.receipt.gas_used,
            fee_wei: r.receipt.fee_wei,
            outcome: r.outcome(),
            output: r.output(),
        })
        .collect()
}

pub fn tx_log_text(run: &ScenarioRun) -> String {
    let mut s = String::new();
    for line in tx_log(run) {
        let output = match line.output {
            Some(CallOutput::Flag(flag)) => format!(" -> {flag}"),
            Some(CallOutput::Paid(wei)) => format!(" -> paid {} eth", format_eth(*wei)),
            _ => String::new(),
        };
        let _ = writeln!(
            s,
            "[block {:>3} tx {}] t={} {:<8} {:<16} gas {:>7}  fee {} eth  {}{}",
            line.block_height,
            line.tx_index,
            line.at,
            line.actor,
            line.function,
            line.gas_used,
            format_eth(line.fee_wei),
            line.outcome,
            output
        );
    }
    s
}

pub fn tx_log_jsonl(run: &ScenarioRun) -> String {
    tx_log(run).iter().map(|l| serde_json::to_string(l).expect("log line serializes") + "\n").collect()
}

/// Contract events as JSON lines: `{"block_height", "log_index", "kind", "payload"}`.
pub fn events_jsonl(run: &ScenarioRun) -> String {
    run.world
        .contract
        .as_ref()
        .map(|c| c.events.iter().map(|e| serde_json::to_string(e).expect("event serializes") + "\n").collect())
        .unwrap_or_default()
}
