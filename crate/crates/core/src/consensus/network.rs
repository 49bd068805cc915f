use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::message::Envelope;

/// A directed link that loses each message independently with the given
/// probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossyEdge {
    pub from: u32,
    pub to: u32,
    pub drop_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub seed: u64,
    pub min_delay: u64,
    pub max_delay: u64,
    #[serde(default)]
    pub lossy_edges: Vec<LossyEdge>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self { seed: 42, min_delay: 1, max_delay: 5, lossy_edges: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SendOutcome {
    Scheduled { deliver_at: u64 },
    Dropped,
}

struct InFlight {
    deliver_at: u64,
    order: u64,
    envelope: Envelope,
}

impl PartialEq for InFlight {
    fn eq(&self, other: &Self) -> bool {
        (self.deliver_at, self.order) == (other.deliver_at, other.order)
    }
}
impl Eq for InFlight {}
impl PartialOrd for InFlight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for InFlight {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.deliver_at, self.order).cmp(&(other.deliver_at, other.order))
    }
}

/// Seeded message scheduler. Every send draws its fate from one RNG stream,
/// and deliveries are ordered by `(delivery time, send order)`, so the same
/// seed and send sequence give the same delivery sequence.
pub struct SimNetwork {
    rng: ChaCha8Rng,
    now: u64,
    min_delay: u64,
    max_delay: u64,
    lossy: BTreeMap<(u32, u32), f64>,
    queue: BinaryHeap<Reverse<InFlight>>,
    sent: u64,
}

impl SimNetwork {
    pub fn new(config: &NetworkConfig) -> Self {
        assert!(config.min_delay <= config.max_delay, "min_delay exceeds max_delay");
        Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            now: 0,
            min_delay: config.min_delay,
            max_delay: config.max_delay,
            lossy: config.lossy_edges.iter().map(|e| ((e.from, e.to), e.drop_probability)).collect(),
            queue: BinaryHeap::new(),
            sent: 0,
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    /// Moves the clock forward without delivering anything.
    pub fn advance(&mut self, by: u64) {
        self.now += by;
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn in_flight(&self) -> usize {
        self.queue.len()
    }

    pub fn send(&mut self, envelope: Envelope) -> SendOutcome {
        if let Some(p) = self.lossy.get(&(envelope.from, envelope.to)) {
            if self.rng.gen_bool(p.clamp(0.0, 1.0)) {
                return SendOutcome::Dropped;
            }
        }
        let deliver_at = self.now + self.rng.gen_range(self.min_delay..=self.max_delay);
        self.queue.push(Reverse(InFlight { deliver_at, order: self.sent, envelope }));
        self.sent += 1;
        SendOutcome::Scheduled { deliver_at }
    }

    /// Pops the next delivery and advances the clock to its time.
    pub fn next_delivery(&mut self) -> Option<Envelope> {
        let Reverse(next) = self.queue.pop()?;
        self.now = self.now.max(next.deliver_at);
        Some(next.envelope)
    }
}
