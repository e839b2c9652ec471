//! Seeded message-passing harness: uniform per-message delay, random
//! drops, interval partitions, and silent-validator windows.
//!
//! Single-threaded discrete-event loop. Deliveries are keyed by
//! (tick, sequence number), so identical config and seed give an
//! identical event sequence. Delay and drop draws happen for every
//! send in a fixed order, even for messages a partition would cut,
//! which keeps the random stream independent of fault windows.

use crate::money::{PartyId, Ratio};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Validators in `cut` exchange nothing with anyone while the inclusive
/// tick interval is active.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub from: u64,
    pub to: u64,
    pub cut: BTreeSet<PartyId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub seed: u64,
    #[serde(default = "default_delay_min")]
    pub delay_min: u64,
    #[serde(default = "default_delay_max")]
    pub delay_max: u64,
    #[serde(default = "Ratio::zero")]
    pub drop_probability: Ratio,
    #[serde(default)]
    pub partitions: Vec<Partition>,
}

fn default_delay_min() -> u64 {
    1
}

fn default_delay_max() -> u64 {
    1
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.delay_min > self.delay_max {
            return Err("delay_min exceeds delay_max".to_string());
        }
        if self.delay_min == 0 {
            return Err("delay_min must be at least 1".to_string());
        }
        let p = self.drop_probability.to_f64();
        if !(0.0..1.0).contains(&p) {
            return Err("drop_probability must lie in [0, 1)".to_string());
        }
        for part in &self.partitions {
            if part.from > part.to {
                return Err("partition interval is inverted".to_string());
            }
        }
        Ok(())
    }

    pub fn is_cut(&self, who: &PartyId, tick: u64) -> bool {
        self.partitions
            .iter()
            .any(|p| tick >= p.from && tick <= p.to && p.cut.contains(who))
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            seed: 0,
            delay_min: 1,
            delay_max: 1,
            drop_probability: Ratio::zero(),
            partitions: Vec::new(),
        }
    }
}

/// A validator inside one of these inclusive windows neither proposes
/// nor votes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SilentWindow {
    pub id: PartyId,
    pub from: u64,
    pub to: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSchedule {
    pub silent: Vec<SilentWindow>,
}

impl FaultSchedule {
    pub fn is_silent(&self, id: &PartyId, tick: u64) -> bool {
        self.silent
            .iter()
            .any(|w| w.id == *id && tick >= w.from && tick <= w.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub from: PartyId,
    pub to: PartyId,
    pub sent_tick: u64,
    pub payload: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SendOutcome {
    Delivered { tick: u64 },
    DroppedRandom,
    CutSender,
    CutReceiver,
}

/// One line of the delivery trace, fixed at send time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub from: PartyId,
    pub to: PartyId,
    pub sent_tick: u64,
    #[serde(flatten)]
    pub result: SendOutcome,
}

/// In-flight messages ordered by (delivery tick, send sequence).
#[derive(Debug)]
pub struct Network<T> {
    cfg: NetworkConfig,
    rng: ChaCha8Rng,
    queue: BTreeMap<(u64, u64), Envelope<T>>,
    next_seq: u64,
    pub trace: Vec<TraceEvent>,
}

impl<T> Network<T> {
    pub fn new(cfg: NetworkConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(1);
        Network { cfg, rng, queue: BTreeMap::new(), next_seq: 0, trace: Vec::new() }
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    /// Queues one message. Delay and drop are drawn here; the partition
    /// check uses the send tick for the sender and the would-be delivery
    /// tick for the receiver.
    pub fn send(&mut self, from: &PartyId, to: &PartyId, tick: u64, payload: T) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let delay = self.rng.gen_range(self.cfg.delay_min..=self.cfg.delay_max);
        let dropped = self.rng.gen::<f64>() < self.cfg.drop_probability.to_f64();
        let deliver_tick = tick + delay;
        let result = if dropped {
            SendOutcome::DroppedRandom
        } else if self.cfg.is_cut(from, tick) {
            SendOutcome::CutSender
        } else if self.cfg.is_cut(to, deliver_tick) {
            SendOutcome::CutReceiver
        } else {
            self.queue.insert(
                (deliver_tick, seq),
                Envelope { from: from.clone(), to: to.clone(), sent_tick: tick, payload },
            );
            SendOutcome::Delivered { tick: deliver_tick }
        };
        self.trace.push(TraceEvent {
            seq,
            from: from.clone(),
            to: to.clone(),
            sent_tick: tick,
            result,
        });
    }

    /// Pops the earliest delivery strictly before `limit`, if any.
    pub fn pop_before(&mut self, limit: u64) -> Option<(u64, Envelope<T>)> {
        let key = *self.queue.keys().next()?;
        if key.0 >= limit {
            return None;
        }
        let env = self.queue.remove(&key).expect("key just observed");
        Some((key.0, env))
    }

    /// Pops the earliest delivery regardless of tick.
    pub fn pop_any(&mut self) -> Option<(u64, Envelope<T>)> {
        let key = *self.queue.keys().next()?;
        let env = self.queue.remove(&key).expect("key just observed");
        Some((key.0, env))
    }

    /// Pops every delivery sharing the earliest tick strictly before
    /// `limit`, in send order. Deliveries within one tick are
    /// simultaneous; consumers act once per tick.
    pub fn pop_batch_before(&mut self, limit: u64) -> Option<(u64, Vec<Envelope<T>>)> {
        let first = *self.queue.keys().next()?;
        if first.0 >= limit {
            return None;
        }
        let tick = first.0;
        let mut batch = Vec::new();
        while let Some(key) = self.queue.keys().next().copied() {
            if key.0 != tick {
                break;
            }
            batch.push(self.queue.remove(&key).expect("key just observed"));
        }
        Some((tick, batch))
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledSend {
    pub tick: u64,
    pub from: PartyId,
    pub to: PartyId,
}

/// Runs a plain send schedule through the harness and returns the trace.
pub fn run_network(events: &[ScheduledSend], cfg: &NetworkConfig) -> Vec<TraceEvent> {
    let mut ordered: Vec<(usize, &ScheduledSend)> = events.iter().enumerate().collect();
    ordered.sort_by_key(|(i, ev)| (ev.tick, *i));
    let mut net: Network<()> = Network::new(cfg.clone());
    for (_, ev) in ordered {
        net.send(&ev.from, &ev.to, ev.tick, ());
    }
    net.trace
}
