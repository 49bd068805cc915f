use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::consensus::{Behavior, LossyEdge};
use crate::gas::GasKey;
use crate::registry::Role;

pub const CONFIG_VERSION: u32 = 1;
pub const ADMIN: &str = "admin";

/// A scenario file. See `scenarios/six_operators.toml` for an annotated example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub name: String,
    pub admin: AdminConfig,
    #[serde(default)]
    pub operators: Vec<OperatorConfig>,
    pub timing: Timing,
    #[serde(default)]
    pub consensus: ConsensusConfig,
    #[serde(default)]
    pub gas: GasConfig,
    #[serde(default)]
    pub script: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdminConfig {
    pub key_seed: String,
    #[serde(default = "default_balance_eth")]
    pub initial_balance_eth: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub id: String,
    pub role: Role,
    pub key_seed: String,
    /// Offered (seller) or demanded (buyer) bandwidth.
    pub bandwidth_mhz: u64,
    pub unit_price_gwei: u64,
    /// Spectrum held and spectrum needed for the seller's own users; sellers only.
    #[serde(default)]
    pub total_bandwidth_mhz: Option<u64>,
    #[serde(default)]
    pub required_bandwidth_mhz: Option<u64>,
    #[serde(default = "default_balance_eth")]
    pub initial_balance_eth: u64,
}

fn default_balance_eth() -> u64 {
    100
}

/// Absolute logical times, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub t0: u64,
    pub t_bid: u64,
    pub t1: u64,
    pub t_free: u64,
    pub tb: u64,
    pub te: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsensusConfig {
    pub replicas: usize,
    pub seed: u64,
    pub min_delay: u64,
    pub max_delay: u64,
    pub max_batch: usize,
    pub max_steps: u64,
    pub retransmit_interval: u64,
    pub faults: Vec<Fault>,
    pub lossy_edges: Vec<LossyEdge>,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            replicas: 4,
            seed: 42,
            min_delay: 1,
            max_delay: 5,
            max_batch: 64,
            max_steps: 200_000,
            retransmit_interval: 50,
            faults: Vec::new(),
            lossy_edges: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fault {
    pub replica: u32,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasConfig {
    /// Decimal Gwei, e.g. "4.3". Defaults to 4.3.
    pub price_gwei: Option<String>,
    pub overrides: BTreeMap<GasKey, u64>,
}

/// One scripted call. Steps sharing `at` go into the same block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub at: u64,
    pub actor: String,
    #[serde(flatten)]
    pub action: Action,
    /// Expected revert code; absent means the call must succeed, "any"
    /// accepts every outcome.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    /// Registers the actor's configured order. Deposit defaults to 1 ether.
    Submit {
        #[serde(default)]
        deposit_gwei: Option<u64>,
        #[serde(default)]
        bandwidth_mhz: Option<u64>,
        #[serde(default)]
        unit_price_gwei: Option<u64>,
    },
    RegistrationEnd,
    SortAsks,
    SortBids,
    DoubleAuction,
    FreeTradeBegin,
    /// Seller reposts its residual order.
    Resubmit { price_gwei: u64, bandwidth_mhz: u64 },
    /// Buyer takes from a seller's posted order.
    Purchase { seller: String, price_gwei: u64, bandwidth_mhz: u64 },
    Delete,
    MarketEnd,
    /// Administrator flags an operator as misbehaving.
    Punish { operator: String },
    PayOrNot { operator: String, executed: bool },
    IncreaseFunds { amount_gwei: u64 },
    Withdraw,
    ChangeOwner { new_owner: String },
    SelfDestruct,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Fails only for integers TOML cannot hold (above `i64::MAX`).
    pub fn to_toml(&self) -> Result<String, String> {
        toml::to_string(self).map_err(|e| e.to_string())
    }

    pub fn operator(&self, id: &str) -> Option<&OperatorConfig> {
        self.operators.iter().find(|o| o.id == id)
    }

    /// Field-level problems; empty when the config is usable.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.version != CONFIG_VERSION {
            errors.push(format!("version: expected {CONFIG_VERSION}, got {}", self.version));
        }

        let t = &self.timing;
        if t.t0 + t.t_bid >= t.t1 {
            errors.push(format!("timing: t0 + t_bid ({}) must be before t1 ({})", t.t0 + t.t_bid, t.t1));
        }
        if t.t1 + t.t_free >= t.tb {
            errors.push(format!("timing: t1 + t_free ({}) must be before tb ({})", t.t1 + t.t_free, t.tb));
        }
        if t.tb >= t.te {
            errors.push(format!("timing: tb ({}) must be before te ({})", t.tb, t.te));
        }

        let mut ids = BTreeSet::from([ADMIN.to_string()]);
        for (i, op) in self.operators.iter().enumerate() {
            let field = format!("operators[{i}]");
            if !ids.insert(op.id.clone()) {
                errors.push(format!("{field}.id: duplicate id {:?}", op.id));
            }
            if op.bandwidth_mhz == 0 {
                errors.push(format!("{field}.bandwidth_mhz: must be positive"));
            }
            if op.unit_price_gwei == 0 {
                errors.push(format!("{field}.unit_price_gwei: must be positive"));
            }
            if op.role == Role::Seller {
                match (op.total_bandwidth_mhz, op.required_bandwidth_mhz) {
                    (Some(total), Some(required)) => {
                        if total < op.bandwidth_mhz || total - op.bandwidth_mhz < required {
                            errors.push(format!(
                                "{field}: seller keeps {} MHz but needs {required} MHz (total {total}, offered {})",
                                total.saturating_sub(op.bandwidth_mhz),
                                op.bandwidth_mhz
                            ));
                        }
                    }
                    _ => errors.push(format!(
                        "{field}: sellers need total_bandwidth_mhz and required_bandwidth_mhz"
                    )),
                }
            }
        }

        let c = &self.consensus;
        if c.replicas == 0 {
            errors.push("consensus.replicas: must be positive".into());
        }
        if c.min_delay > c.max_delay {
            errors.push("consensus.min_delay: exceeds max_delay".into());
        }
        if c.max_batch == 0 {
            errors.push("consensus.max_batch: must be positive".into());
        }
        if c.max_steps == 0 {
            errors.push("consensus.max_steps: must be positive".into());
        }
        for (i, fault) in c.faults.iter().enumerate() {
            if fault.replica as usize >= c.replicas {
                errors.push(format!("consensus.faults[{i}].replica: no replica {}", fault.replica));
            }
        }
        for (i, edge) in c.lossy_edges.iter().enumerate() {
            if !(0.0..=1.0).contains(&edge.drop_probability) {
                errors.push(format!("consensus.lossy_edges[{i}].drop_probability: must be in [0, 1]"));
            }
        }

        if let Some(price) = &self.gas.price_gwei {
            if let Err(e) = price.parse::<crate::gas::GasPrice>() {
                errors.push(format!("gas.price_gwei: {e}"));
            }
        }

        let mut last_at = t.t0;
        for (i, step) in self.script.iter().enumerate() {
            let field = format!("script[{i}]");
            if step.at <= t.t0 {
                errors.push(format!("{field}.at: must be after t0 ({}), the deploy block", t.t0));
            }
            if step.at < last_at {
                errors.push(format!("{field}.at: script times must not decrease"));
            }
            last_at = last_at.max(step.at);
            if !ids.contains(&step.actor) {
                errors.push(format!("{field}.actor: unknown actor {:?}", step.actor));
            }
            let named = match &step.action {
                Action::Purchase { seller, .. } => Some(seller),
                Action::Punish { operator } | Action::PayOrNot { operator, .. } => Some(operator),
                Action::ChangeOwner { new_owner } => Some(new_owner),
                _ => None,
            };
            if let Some(name) = named {
                if !ids.contains(name) {
                    errors.push(format!("{field}: unknown operator {name:?}"));
                }
            }
            if matches!(step.action, Action::Submit { .. }) && step.actor == ADMIN {
                errors.push(format!("{field}: the administrator cannot submit orders"));
            }
            if matches!(step.action, Action::FreeTradeBegin) && step.at != t.t1 && step.expect.is_none() {
                errors.push(format!("{field}.at: free_trade_begin must run at t1 ({})", t.t1));
            }
        }
        errors
    }
}
